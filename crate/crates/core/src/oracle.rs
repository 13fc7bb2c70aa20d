//! Brute-force validators that recompute results through independent paths:
//! physical branch removal instead of LODF algebra, exhaustive combination
//! scans instead of extension-set enumeration, per-column flow solves
//! instead of matrix assembly.

use serde::Serialize;

use crate::dcsens::{
    dc_flow, predict_outage_flows, FlowVector, LodfMatrix, SensitivityStack, ISLAND_EPS,
};
use crate::error::{Error, Result};
use crate::graphlets::{self, GraphletCensus};
use crate::linalg::Matrix;
use crate::netmodel::{build_graph, is_connected, Network, SimpleGraph};
use crate::scalar::{s, Scalar};

/// Node-count ceiling for the exhaustive 4-subset census.
pub const BRUTE_CENSUS_GUARD: usize = 60;

/// One fast-path/oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// What was compared, including the worst-case location when aggregated.
    pub quantity: String,
    pub fast: f64,
    pub oracle: f64,
    /// |fast − oracle|; for set comparisons, the number of differing cells.
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    fn new(quantity: String, fast: f64, oracle: f64, tolerance: f64) -> Self {
        let difference = (fast - oracle).abs();
        Self {
            quantity,
            fast,
            oracle,
            difference,
            tolerance,
            pass: difference <= tolerance,
        }
    }
}

/// Post-outage flows by physically removing the branch and re-solving.
/// Flows are re-indexed to the original network; the outaged branch carries
/// zero. Any disconnection is an islanding error, mirroring the fast path's
/// island flag.
pub fn outage_oracle<S: Scalar>(
    network: &Network<S>,
    injections: &[S],
    lo: usize,
) -> Result<FlowVector<S>> {
    let reduced = network.without_branch(lo);
    if !is_connected(&build_graph(&reduced)) {
        return Err(Error::Islanding(format!(
            "removing branch index {lo} disconnects the network"
        )));
    }
    let reduced_flows = dc_flow(&reduced, injections)?;
    let mut values = vec![S::zero(); network.branch_count()];
    for (r, &flow) in reduced_flows.values.iter().enumerate() {
        let orig = if r < lo { r } else { r + 1 };
        values[orig] = flow;
    }
    Ok(FlowVector { values })
}

/// Sorted induced degree sequence → class position, written out directly so
/// the oracle shares no classification code with the fast path.
fn brute_class(degrees: [u8; 4]) -> Option<usize> {
    match degrees {
        [1, 1, 1, 3] => Some(0),
        [1, 1, 2, 2] => Some(1),
        [1, 2, 2, 3] => Some(2),
        [2, 2, 2, 2] => Some(3),
        [2, 2, 3, 3] => Some(4),
        [3, 3, 3, 3] => Some(5),
        _ => None,
    }
}

/// Exhaustive census over all 4-node combinations. Refuses graphs above
/// [`BRUTE_CENSUS_GUARD`] nodes.
pub fn brute_census(graph: &SimpleGraph) -> Result<GraphletCensus> {
    let n = graph.node_count();
    if n > BRUTE_CENSUS_GUARD {
        return Err(Error::Guard(format!(
            "brute census refused: {n} nodes exceeds the {BRUTE_CENSUS_GUARD}-node guard"
        )));
    }
    let mut per_edge = vec![[0u64; 6]; graph.edge_count()];
    let mut totals = [0u64; 6];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let nodes = [a, b, c, d];
                    let mut degrees = [0u8; 4];
                    for i in 0..4 {
                        for j in i + 1..4 {
                            if graph.has_edge(nodes[i], nodes[j]) {
                                degrees[i] += 1;
                                degrees[j] += 1;
                            }
                        }
                    }
                    degrees.sort_unstable();
                    let Some(class) = brute_class(degrees) else {
                        continue;
                    };
                    totals[class] += 1;
                    for i in 0..4 {
                        for j in i + 1..4 {
                            if let Some(edge) = graph.edge_id(nodes[i], nodes[j]) {
                                per_edge[edge][class] += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(GraphletCensus::from_parts(per_edge, totals))
}

/// LODF of the network minus one branch, built column by column from unit
/// endpoint transfers solved as plain DC flows — no shift-factor algebra.
pub fn n2_rebuild_oracle<S: Scalar>(network: &Network<S>, first: usize) -> Result<LodfMatrix<S>> {
    let reduced = network.without_branch(first);
    if !is_connected(&build_graph(&reduced)) {
        return Err(Error::Islanding(format!(
            "first outage (branch index {first}) disconnects the network"
        )));
    }
    let l = reduced.branch_count();
    let eps = s::<S>(ISLAND_EPS);
    let mut values = Matrix::zeros(l, l);
    let mut island = vec![false; l];
    for outage in reduced.in_service() {
        let lo = outage.index;
        let mut injections = vec![S::zero(); reduced.bus_count()];
        let from = reduced
            .bus_position(outage.from_bus)
            .expect("validated endpoint");
        let to = reduced
            .bus_position(outage.to_bus)
            .expect("validated endpoint");
        injections[from] += S::one();
        injections[to] -= S::one();
        let transfer = dc_flow(&reduced, &injections)?;
        let denom = S::one() - transfer.values[lo];
        if denom.abs() < eps {
            island[lo] = true;
            for lm in 0..l {
                values[(lm, lo)] = S::nan();
            }
            continue;
        }
        for lm in 0..l {
            values[(lm, lo)] = if lm == lo {
                s::<S>(crate::dcsens::LODF_DIAGONAL)
            } else {
                transfer.values[lm] / denom
            };
        }
    }
    Ok(LodfMatrix::from_parts(values, island))
}

/// Runs every oracle comparison on one case at the given tolerance.
/// Set-valued checks (island flags, census cells) use a zero tolerance on
/// their mismatch count. The census check only runs within the brute guard.
pub fn verify_case<S: Scalar>(network: &Network<S>, tolerance: f64) -> Result<Vec<OracleReport>> {
    let mut reports = Vec::new();
    let stack = SensitivityStack::build(network)?;
    let refs: Vec<(u32, u32)> = network
        .in_service()
        .map(|b| (b.from_bus, b.to_bus))
        .collect();
    let l = network.branch_count();

    // Island flags vs. physical disconnection.
    let fast_islands: Vec<usize> = (0..l)
        .filter(|&lo| stack.lodf.is_island_causing(lo))
        .collect();
    let oracle_islands: Vec<usize> = (0..l)
        .filter(|&lo| !is_connected(&build_graph(&network.without_branch(lo))))
        .collect();
    let mismatched = fast_islands
        .iter()
        .filter(|lo| !oracle_islands.contains(lo))
        .count()
        + oracle_islands
            .iter()
            .filter(|lo| !fast_islands.contains(lo))
            .count();
    reports.push(OracleReport {
        quantity: "island-causing outage set (mismatched branches)".into(),
        fast: fast_islands.len() as f64,
        oracle: oracle_islands.len() as f64,
        difference: mismatched as f64,
        tolerance: 0.0,
        pass: mismatched == 0,
    });

    // Predicted post-outage flows vs. physical re-solve.
    let injections = test_injections(network);
    let pre = dc_flow(network, &injections)?;
    let mut worst: Option<(f64, f64, f64, usize, usize)> = None;
    for lo in 0..l {
        if stack.lodf.is_island_causing(lo) {
            continue;
        }
        let predicted = predict_outage_flows(&stack.lodf, &pre, lo)?;
        let resolved = outage_oracle(network, &injections, lo)?;
        for lm in 0..l {
            let fast = predicted.values[lm].to_f64().expect("finite flow");
            let slow = resolved.values[lm].to_f64().expect("finite flow");
            let diff = (fast - slow).abs();
            if worst.is_none_or(|w| diff > w.0) {
                worst = Some((diff, fast, slow, lo, lm));
            }
        }
    }
    match worst {
        Some((_, fast, slow, lo, lm)) => reports.push(OracleReport::new(
            format!(
                "post-outage flow, worst over all outages (outage {}-{}, branch {}-{})",
                refs[lo].0, refs[lo].1, refs[lm].0, refs[lm].1
            ),
            fast,
            slow,
            tolerance,
        )),
        None => reports.push(OracleReport {
            quantity: "post-outage flow (no non-islanding outages)".into(),
            fast: 0.0,
            oracle: 0.0,
            difference: 0.0,
            tolerance,
            pass: true,
        }),
    }

    // Graphlet census vs. exhaustive combinations, within the guard.
    let graph = build_graph(network);
    if graph.node_count() <= BRUTE_CENSUS_GUARD {
        let fast = graphlets::edge_census(&graph);
        let brute = brute_census(&graph)?;
        let mut differing = 0u64;
        for e in 0..graph.edge_count() {
            let (a, b) = (fast.edge_counts(e), brute.edge_counts(e));
            differing += a.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
        }
        differing += fast
            .totals()
            .iter()
            .zip(&brute.totals())
            .filter(|(x, y)| x != y)
            .count() as u64;
        reports.push(OracleReport {
            quantity: "graphlet census (differing cells)".into(),
            fast: fast.totals().iter().sum::<u64>() as f64,
            oracle: brute.totals().iter().sum::<u64>() as f64,
            difference: differing as f64,
            tolerance: 0.0,
            pass: differing == 0,
        });
    }

    // Reduced-network LODF for the first non-islanding outage.
    if let Some(first) = (0..l).find(|&lo| !stack.lodf.is_island_causing(lo)) {
        let reduced = network.without_branch(first);
        let fast = SensitivityStack::build(&reduced)?.lodf;
        let slow = n2_rebuild_oracle(network, first)?;
        let mut max_diff = 0.0f64;
        let mut at = (0.0, 0.0);
        let mut flags_agree = true;
        for lo in 0..fast.branch_count() {
            flags_agree &= fast.is_island_causing(lo) == slow.is_island_causing(lo);
            for lm in 0..fast.branch_count() {
                if let (Some(a), Some(b)) = (fast.get(lm, lo), slow.get(lm, lo)) {
                    let (a, b) = (a.to_f64().unwrap(), b.to_f64().unwrap());
                    if (a - b).abs() > max_diff {
                        max_diff = (a - b).abs();
                        at = (a, b);
                    }
                }
            }
        }
        reports.push(OracleReport {
            quantity: format!(
                "reduced-network LODF after outage {}-{} (worst entry)",
                refs[first].0, refs[first].1
            ),
            fast: at.0,
            oracle: at.1,
            difference: if flags_agree { max_diff } else { f64::INFINITY },
            tolerance,
            pass: flags_agree && max_diff <= tolerance,
        });
    }

    // Bus-balance conservation of the base DC flow.
    let mut worst_residual = 0.0f64;
    let mut worst_bus = network.slack().id;
    for (pos, bus) in network.buses().iter().enumerate() {
        if bus.is_slack {
            continue;
        }
        let mut net_out = 0.0;
        for b in network.in_service() {
            if b.from_bus == bus.id {
                net_out += pre.values[b.index].to_f64().expect("finite flow");
            }
            if b.to_bus == bus.id {
                net_out -= pre.values[b.index].to_f64().expect("finite flow");
            }
        }
        let residual = (net_out - injections[pos].to_f64().expect("finite injection")).abs();
        if residual > worst_residual {
            worst_residual = residual;
            worst_bus = bus.id;
        }
    }
    reports.push(OracleReport {
        quantity: format!("DC flow bus balance (worst bus {worst_bus})"),
        fast: worst_residual,
        oracle: 0.0,
        difference: worst_residual,
        tolerance,
        pass: worst_residual <= tolerance,
    });

    Ok(reports)
}

/// Deterministic, seed-free injection pattern: mean-centered sinusoid,
/// normalized to a unit maximum; sums to zero up to rounding.
pub fn test_injections<S: Scalar>(network: &Network<S>) -> Vec<S> {
    let n = network.bus_count();
    let mut values: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).sin()).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    for v in &mut values {
        *v -= mean;
    }
    let max = values
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1e-12);
    values.into_iter().map(|v| s::<S>(v / max)).collect()
}
