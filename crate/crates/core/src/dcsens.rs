//! DC power flow and linear sensitivities: ISF, PTDF, LODF, outage prediction.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{LuFactors, Matrix};
use crate::netmodel::{build_graph, connected_components, Network};
use crate::scalar::{s, Scalar};

/// Threshold on |1 − τ_self| below which an outage is flagged as islanding.
pub const ISLAND_EPS: f64 = 1e-6;

/// Sentinel stored on the LODF diagonal; excluded from every max scan.
pub const LODF_DIAGONAL: f64 = -1.0;

/// Branch flows, per-unit, signed positive from `from_bus` to `to_bus`,
/// indexed by dense branch index.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVector<S> {
    pub values: Vec<S>,
}

/// Injection shift factors: L×N, flow change on each branch per unit
/// injection at each bus (withdrawn at the slack). Slack column is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IsfMatrix<S> {
    values: Matrix<S>,
}

impl<S: Scalar> IsfMatrix<S> {
    /// Sensitivity of branch `lm` to injection at dense bus position `bus`.
    pub fn get(&self, lm: usize, bus: usize) -> S {
        self.values[(lm, bus)]
    }

    pub fn branch_count(&self) -> usize {
        self.values.rows()
    }

    pub fn bus_count(&self) -> usize {
        self.values.cols()
    }
}

/// Power transfer distribution factors: L×L, flow change on branch `lm` per
/// unit transfer injected at `from(lo)` and withdrawn at `to(lo)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PtdfMatrix<S> {
    values: Matrix<S>,
}

impl<S: Scalar> PtdfMatrix<S> {
    pub fn get(&self, lm: usize, lo: usize) -> S {
        self.values[(lm, lo)]
    }

    pub fn branch_count(&self) -> usize {
        self.values.rows()
    }
}

/// Line outage distribution factors: L×L, fraction of the outaged branch's
/// pre-outage flow redistributed onto each surviving branch. The diagonal
/// holds [`LODF_DIAGONAL`]; island-causing columns hold no numeric entries.
#[derive(Debug, Clone)]
pub struct LodfMatrix<S> {
    values: Matrix<S>,
    island: Vec<bool>,
}

impl<S: Scalar> LodfMatrix<S> {
    /// Assembles a matrix from raw parts; used by independent validators.
    pub fn from_parts(values: Matrix<S>, island: Vec<bool>) -> Self {
        assert_eq!(values.rows(), island.len(), "one island flag per branch");
        assert_eq!(values.rows(), values.cols(), "LODF is square");
        Self { values, island }
    }

    pub fn branch_count(&self) -> usize {
        self.values.rows()
    }

    /// True when outaging branch `lo` splits the network.
    pub fn is_island_causing(&self, lo: usize) -> bool {
        self.island[lo]
    }

    /// Defined off-diagonal entry; `None` on the diagonal or in an
    /// island-causing column.
    pub fn get(&self, lm: usize, lo: usize) -> Option<S> {
        if lm == lo || self.island[lo] {
            None
        } else {
            Some(self.values[(lm, lo)])
        }
    }

    /// Raw stored value, sentinel diagonal included.
    pub fn raw(&self, lm: usize, lo: usize) -> S {
        self.values[(lm, lo)]
    }
}

/// The three sensitivity matrices of one network state.
#[derive(Debug, Clone)]
pub struct SensitivityStack<S> {
    pub isf: IsfMatrix<S>,
    pub ptdf: PtdfMatrix<S>,
    pub lodf: LodfMatrix<S>,
}

impl<S: Scalar> SensitivityStack<S> {
    /// Builds ISF, PTDF, and LODF for a connected network.
    pub fn build(network: &Network<S>) -> Result<Self> {
        let isf = isf_matrix(network)?;
        let ptdf = ptdf_matrix(&isf, network);
        let lodf = lodf_matrix(&ptdf);
        Ok(Self { isf, ptdf, lodf })
    }
}

/// Nodal susceptance matrix restricted to the given dense bus positions.
/// `keep[i]` maps reduced row/column `i` back to its bus position.
fn reduced_susceptance<S: Scalar>(network: &Network<S>, keep: &[usize]) -> Matrix<S> {
    let mut pos_to_red = vec![usize::MAX; network.bus_count()];
    for (red, &pos) in keep.iter().enumerate() {
        pos_to_red[pos] = red;
    }
    let mut b = Matrix::zeros(keep.len(), keep.len());
    for branch in network.in_service() {
        let a = network
            .bus_position(branch.from_bus)
            .expect("validated endpoint");
        let c = network
            .bus_position(branch.to_bus)
            .expect("validated endpoint");
        let adm = S::one() / branch.reactance;
        let (ra, rc) = (pos_to_red[a], pos_to_red[c]);
        if ra != usize::MAX {
            b[(ra, ra)] += adm;
        }
        if rc != usize::MAX {
            b[(rc, rc)] += adm;
        }
        if ra != usize::MAX && rc != usize::MAX {
            b[(ra, rc)] -= adm;
            b[(rc, ra)] -= adm;
        }
    }
    b
}

/// DC power flow for the given per-bus injections (dense bus positions).
/// The slack absorbs any imbalance within its component; a nonzero injection
/// outside the slack's component is an islanding error. Branches outside the
/// slack's component carry zero flow.
pub fn dc_flow<S: Scalar>(network: &Network<S>, injections: &[S]) -> Result<FlowVector<S>> {
    assert_eq!(
        injections.len(),
        network.bus_count(),
        "one injection per bus"
    );
    let graph = build_graph(network);
    let components = connected_components(&graph);
    let slack_pos = network.slack_position();
    let slack_comp = components
        .iter()
        .find(|c| c.binary_search(&slack_pos).is_ok())
        .expect("slack bus exists");
    for comp in &components {
        if std::ptr::eq(comp, slack_comp) {
            continue;
        }
        for &pos in comp {
            if injections[pos] != S::zero() {
                return Err(Error::Islanding(format!(
                    "bus {} carries a nonzero injection but lies in a component \
                     (containing bus {}) disconnected from the slack",
                    network.bus_id_at(pos),
                    network.bus_id_at(comp[0]),
                )));
            }
        }
    }

    let keep: Vec<usize> = slack_comp
        .iter()
        .copied()
        .filter(|&p| p != slack_pos)
        .collect();
    let mut angles = vec![S::zero(); network.bus_count()];
    if !keep.is_empty() {
        let b = reduced_susceptance(network, &keep);
        let lu = LuFactors::factorize(b)?;
        let rhs: Vec<S> = keep.iter().map(|&p| injections[p]).collect();
        for (&pos, theta) in keep.iter().zip(lu.solve(&rhs)) {
            angles[pos] = theta;
        }
    }

    let mut flows = vec![S::zero(); network.branch_count()];
    for branch in network.in_service() {
        let a = network
            .bus_position(branch.from_bus)
            .expect("validated endpoint");
        let c = network
            .bus_position(branch.to_bus)
            .expect("validated endpoint");
        if slack_comp.binary_search(&a).is_ok() {
            flows[branch.index] = (angles[a] - angles[c]) / branch.reactance;
        }
    }
    Ok(FlowVector { values: flows })
}

/// Injection shift factors of a connected network: diagonal branch
/// susceptances times reduced incidence times the inverse reduced nodal
/// susceptance, with a zero column re-inserted for the slack. The reduced
/// matrix is factored once and reused across all right-hand sides.
pub fn isf_matrix<S: Scalar>(network: &Network<S>) -> Result<IsfMatrix<S>> {
    let graph = build_graph(network);
    let components = connected_components(&graph);
    if components.len() > 1 {
        return Err(Error::Islanding(format!(
            "network is disconnected ({} components)",
            components.len()
        )));
    }
    let slack_pos = network.slack_position();
    let keep: Vec<usize> = (0..network.bus_count())
        .filter(|&p| p != slack_pos)
        .collect();
    let mut pos_to_red = vec![usize::MAX; network.bus_count()];
    for (red, &pos) in keep.iter().enumerate() {
        pos_to_red[pos] = red;
    }
    let lu = LuFactors::factorize(reduced_susceptance(network, &keep))?;

    let mut values = Matrix::zeros(network.branch_count(), network.bus_count());
    for branch in network.in_service() {
        let a = network
            .bus_position(branch.from_bus)
            .expect("validated endpoint");
        let c = network
            .bus_position(branch.to_bus)
            .expect("validated endpoint");
        let adm = S::one() / branch.reactance;
        // Row of (branch susceptance)·(reduced incidence); the reduced nodal
        // matrix is symmetric, so one solve per branch yields the ISF row.
        let mut rhs = vec![S::zero(); keep.len()];
        if pos_to_red[a] != usize::MAX {
            rhs[pos_to_red[a]] += adm;
        }
        if pos_to_red[c] != usize::MAX {
            rhs[pos_to_red[c]] -= adm;
        }
        let row = lu.solve(&rhs);
        for (&pos, value) in keep.iter().zip(row) {
            values[(branch.index, pos)] = value;
        }
    }
    Ok(IsfMatrix { values })
}

/// PTDF from ISF: column `lo` is the ISF column of `from(lo)` minus the ISF
/// column of `to(lo)` — the unit transfer across branch `lo`'s endpoints.
pub fn ptdf_matrix<S: Scalar>(isf: &IsfMatrix<S>, network: &Network<S>) -> PtdfMatrix<S> {
    let l = network.branch_count();
    let mut values = Matrix::zeros(l, l);
    for outage in network.in_service() {
        let a = network
            .bus_position(outage.from_bus)
            .expect("validated endpoint");
        let c = network
            .bus_position(outage.to_bus)
            .expect("validated endpoint");
        for lm in 0..l {
            values[(lm, outage.index)] = isf.get(lm, a) - isf.get(lm, c);
        }
    }
    PtdfMatrix { values }
}

/// LODF from PTDF: φ(lm, lo) = τ(lm, lo) / (1 − τ(lo, lo)). Columns with
/// |1 − τ_self| below [`ISLAND_EPS`] are flagged island-causing and carry no
/// numeric entries; the diagonal holds the sentinel.
pub fn lodf_matrix<S: Scalar>(ptdf: &PtdfMatrix<S>) -> LodfMatrix<S> {
    let l = ptdf.branch_count();
    let eps = s::<S>(ISLAND_EPS);
    let mut values = Matrix::zeros(l, l);
    let mut island = vec![false; l];
    for lo in 0..l {
        let denom = S::one() - ptdf.get(lo, lo);
        if denom.abs() < eps {
            island[lo] = true;
            for lm in 0..l {
                values[(lm, lo)] = S::nan();
            }
            continue;
        }
        for lm in 0..l {
            values[(lm, lo)] = if lm == lo {
                s::<S>(LODF_DIAGONAL)
            } else {
                ptdf.get(lm, lo) / denom
            };
        }
    }
    LodfMatrix { values, island }
}

/// Post-outage flows predicted from the LODF: surviving branch `lm` carries
/// its pre-outage flow plus φ(lm, lo) times the outaged branch's flow; the
/// outaged branch carries zero.
pub fn predict_outage_flows<S: Scalar>(
    lodf: &LodfMatrix<S>,
    pre_outage: &FlowVector<S>,
    lo: usize,
) -> Result<FlowVector<S>> {
    if lodf.is_island_causing(lo) {
        return Err(Error::Islanding(format!(
            "outage of branch index {lo} islands the network; no redistribution is defined"
        )));
    }
    let shifted = pre_outage.values[lo];
    let values = pre_outage
        .values
        .iter()
        .enumerate()
        .map(|(lm, &flow)| match lodf.get(lm, lo) {
            Some(phi) => flow + phi * shifted,
            None => S::zero(),
        })
        .collect();
    Ok(FlowVector { values })
}

/// Writes the L×L LODF as CSV: outage branches as column headers, monitored
/// branches as row labels, `ISLAND` for undefined (island-causing) columns.
pub fn dump_lodf_csv<S: Scalar>(
    network: &Network<S>,
    lodf: &LodfMatrix<S>,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let labels: Vec<String> = network
        .in_service()
        .map(|b| format!("{}-{}", b.from_bus, b.to_bus))
        .collect();
    write!(out, "branch")?;
    for label in &labels {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    for (lm, label) in labels.iter().enumerate() {
        write!(out, "{label}")?;
        for lo in 0..lodf.branch_count() {
            if lodf.is_island_causing(lo) {
                write!(out, ",ISLAND")?;
            } else {
                write!(out, ",{}", lodf.raw(lm, lo))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
