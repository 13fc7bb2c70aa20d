//! In-memory network model and its undirected simple-graph view.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A bus (node) of the network, keyed by its external number.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Bus {
    /// External bus number as it appears in case data.
    pub id: u32,
    /// Angle-reference bus absorbing the injection balance.
    pub is_slack: bool,
}

/// A transmission branch between two buses.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    /// Dense 0-based index; contiguous `0..L` over in-service branches,
    /// out-of-service branches numbered after them.
    pub index: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    /// Per-unit series reactance; susceptance is its reciprocal.
    pub reactance: S,
    pub in_service: bool,
}

/// Branch definition handed to [`Network::new`]; indices are assigned there.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDef<S> {
    pub from_bus: u32,
    pub to_bus: u32,
    pub reactance: S,
    pub in_service: bool,
}

impl<S> BranchDef<S> {
    /// In-service branch definition.
    pub fn new(from_bus: u32, to_bus: u32, reactance: S) -> Self {
        Self {
            from_bus,
            to_bus,
            reactance,
            in_service: true,
        }
    }
}

/// Compact branch identity carried by contingency records and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct BranchRef {
    pub from_bus: u32,
    pub to_bus: u32,
    /// Dense in-service branch index.
    pub index: usize,
}

impl BranchRef {
    /// Endpoint pair used for lexicographic tie-breaks.
    pub fn key(&self) -> (u32, u32) {
        (self.from_bus, self.to_bus)
    }
}

impl<S> Branch<S> {
    pub fn to_ref(&self) -> BranchRef {
        BranchRef {
            from_bus: self.from_bus,
            to_bus: self.to_bus,
            index: self.index,
        }
    }
}

impl std::fmt::Display for BranchRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.from_bus, self.to_bus)
    }
}

/// A validated power network: buses, branches, one slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<S> {
    name: String,
    buses: Vec<Bus>,
    branches: Vec<Branch<S>>,
    bus_pos: HashMap<u32, usize>,
    in_service_count: usize,
}

impl<S: Scalar> Network<S> {
    /// Builds a network, assigning dense branch indices and checking the
    /// model invariants: unique bus ids, exactly one slack, known endpoints,
    /// no self-loops, nonzero reactance on in-service branches.
    pub fn new(name: impl Into<String>, buses: Vec<Bus>, defs: Vec<BranchDef<S>>) -> Result<Self> {
        let name = name.into();
        let mut bus_pos = HashMap::with_capacity(buses.len());
        for (pos, bus) in buses.iter().enumerate() {
            if bus_pos.insert(bus.id, pos).is_some() {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
        }
        let slack_count = buses.iter().filter(|b| b.is_slack).count();
        if slack_count != 1 {
            return Err(Error::Validation(format!(
                "expected exactly one slack bus, found {slack_count}"
            )));
        }
        let in_service_count = defs.iter().filter(|d| d.in_service).count();
        let mut next_active = 0;
        let mut next_inactive = in_service_count;
        let mut branches = Vec::with_capacity(defs.len());
        for def in defs {
            let label = format!("branch {}-{}", def.from_bus, def.to_bus);
            if def.from_bus == def.to_bus {
                return Err(Error::Validation(format!("{label} is a self-loop")));
            }
            for end in [def.from_bus, def.to_bus] {
                if !bus_pos.contains_key(&end) {
                    return Err(Error::Validation(format!(
                        "{label} references unknown bus {end}"
                    )));
                }
            }
            if def.in_service && def.reactance == S::zero() {
                return Err(Error::Validation(format!("{label} has zero reactance")));
            }
            let index = if def.in_service {
                next_active += 1;
                next_active - 1
            } else {
                next_inactive += 1;
                next_inactive - 1
            };
            branches.push(Branch {
                index,
                from_bus: def.from_bus,
                to_bus: def.to_bus,
                reactance: def.reactance,
                in_service: def.in_service,
            });
        }
        Ok(Self {
            name,
            buses,
            branches,
            bus_pos,
            in_service_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// All branches in input order, including out-of-service ones.
    pub fn all_branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    /// In-service branches in dense index order.
    pub fn in_service(&self) -> impl Iterator<Item = &Branch<S>> {
        self.branches.iter().filter(|b| b.in_service)
    }

    /// Number of in-service branches (`L`).
    pub fn branch_count(&self) -> usize {
        self.in_service_count
    }

    /// In-service branch with the given dense index.
    pub fn branch(&self, index: usize) -> &Branch<S> {
        self.in_service()
            .find(|b| b.index == index)
            .expect("dense branch index in range")
    }

    /// Dense position of a bus id, if present.
    pub fn bus_position(&self, id: u32) -> Option<usize> {
        self.bus_pos.get(&id).copied()
    }

    pub fn bus_id_at(&self, pos: usize) -> u32 {
        self.buses[pos].id
    }

    pub fn slack(&self) -> &Bus {
        self.buses
            .iter()
            .find(|b| b.is_slack)
            .expect("validated slack")
    }

    /// Dense position of the slack bus.
    pub fn slack_position(&self) -> usize {
        self.bus_pos[&self.slack().id]
    }

    /// The same network with one in-service branch removed; remaining
    /// branches are re-indexed densely in their original order.
    pub fn without_branch(&self, index: usize) -> Network<S> {
        let defs = self
            .branches
            .iter()
            .filter(|b| !(b.in_service && b.index == index))
            .map(|b| BranchDef {
                from_bus: b.from_bus,
                to_bus: b.to_bus,
                reactance: b.reactance,
                in_service: b.in_service,
            })
            .collect();
        Network::new(self.name.clone(), self.buses.clone(), defs)
            .expect("branch removal preserves invariants")
    }

    /// The same network with every slack marking moved to `bus_id`.
    pub fn with_slack(&self, bus_id: u32) -> Result<Network<S>> {
        if !self.bus_pos.contains_key(&bus_id) {
            return Err(Error::Validation(format!("unknown slack bus {bus_id}")));
        }
        let buses = self
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                is_slack: b.id == bus_id,
            })
            .collect();
        let defs = self
            .branches
            .iter()
            .map(|b| BranchDef {
                from_bus: b.from_bus,
                to_bus: b.to_bus,
                reactance: b.reactance,
                in_service: b.in_service,
            })
            .collect();
        Network::new(self.name.clone(), buses, defs)
    }

    /// Converts every reactance into another scalar width.
    pub fn cast<T: Scalar>(&self) -> Network<T> {
        let buses = self.buses.clone();
        let defs = self
            .branches
            .iter()
            .map(|b| BranchDef {
                from_bus: b.from_bus,
                to_bus: b.to_bus,
                reactance: T::from(b.reactance).expect("reactance representable"),
                in_service: b.in_service,
            })
            .collect();
        Network::new(self.name.clone(), buses, defs).expect("cast preserves invariants")
    }
}

/// Undirected simple graph over dense node indices; parallel branches are
/// collapsed onto one edge that remembers every contributing branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adjacency: Vec<BTreeSet<usize>>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    branch_to_edge: Vec<usize>,
    edge_branches: Vec<Vec<usize>>,
}

impl SimpleGraph {
    /// Graph from explicit edges (test fixtures and validators); duplicate
    /// and self-loop pairs are ignored. No branch mapping is recorded.
    pub fn from_edges(node_count: usize, pairs: &[(usize, usize)]) -> Self {
        let mut g = Self {
            adjacency: vec![BTreeSet::new(); node_count],
            edges: Vec::new(),
            edge_index: HashMap::new(),
            branch_to_edge: Vec::new(),
            edge_branches: Vec::new(),
        };
        for &(a, b) in pairs {
            g.insert_edge(a, b);
        }
        g
    }

    fn insert_edge(&mut self, a: usize, b: usize) -> Option<usize> {
        if a == b {
            return None;
        }
        let key = (a.min(b), a.max(b));
        let id = *self.edge_index.entry(key).or_insert_with(|| {
            self.edges.push(key);
            self.edge_branches.push(Vec::new());
            self.edges.len() - 1
        });
        self.adjacency[key.0].insert(key.1);
        self.adjacency[key.1].insert(key.0);
        Some(id)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge list as `(low, high)` node pairs; the position is the edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &BTreeSet<usize> {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(&b))
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Simple edge carrying the given dense branch index.
    pub fn edge_for_branch(&self, branch_index: usize) -> Option<usize> {
        self.branch_to_edge.get(branch_index).copied()
    }

    /// Dense branch indices collapsed onto an edge.
    pub fn branches_on_edge(&self, edge_id: usize) -> &[usize] {
        &self.edge_branches[edge_id]
    }
}

/// Builds the simple-graph view: out-of-service branches excluded, parallel
/// branches collapsed, every contributing branch index recorded on its edge.
pub fn build_graph<S: Scalar>(network: &Network<S>) -> SimpleGraph {
    let mut g = SimpleGraph {
        adjacency: vec![BTreeSet::new(); network.bus_count()],
        edges: Vec::new(),
        edge_index: HashMap::new(),
        branch_to_edge: vec![usize::MAX; network.branch_count()],
        edge_branches: Vec::new(),
    };
    for branch in network.in_service() {
        let a = network
            .bus_position(branch.from_bus)
            .expect("validated endpoint");
        let b = network
            .bus_position(branch.to_bus)
            .expect("validated endpoint");
        let id = g.insert_edge(a, b).expect("no self-loops after validation");
        g.branch_to_edge[branch.index] = id;
        g.edge_branches[id].push(branch.index);
    }
    g
}

/// Connected components as sorted node lists, ordered by smallest member.
pub fn connected_components(graph: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &v in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

/// True when the graph has at most one connected component.
pub fn is_connected(graph: &SimpleGraph) -> bool {
    connected_components(graph).len() <= 1
}
