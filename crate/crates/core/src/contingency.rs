//! N-1 and N-2 contingency scans ranking branches by maximum |LODF| impact.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::dcsens::{LodfMatrix, SensitivityStack};
use crate::error::Result;
use crate::netmodel::{BranchRef, Network};
use crate::scalar::Scalar;

/// Outcome of one single-line outage.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct N1Record<S> {
    pub outage: BranchRef,
    /// Largest |LODF| among surviving branches; `None` when island-causing.
    pub max_abs_lodf: Option<S>,
    /// Surviving branch attaining the maximum.
    pub argmax: Option<BranchRef>,
    pub island_causing: bool,
}

/// Outcome of the worst second outage following a given first outage.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct N2Record<S> {
    pub first: BranchRef,
    pub second: BranchRef,
    /// Largest |LODF| over the doubly-reduced network's surviving branches.
    pub max_abs_lodf: S,
    pub argmax: BranchRef,
    /// Neither outage islands its network state.
    pub feasible: bool,
}

/// Per-first-outage records plus the globally worst pair.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct N2Scan<S> {
    pub records: Vec<N2Record<S>>,
    pub best: Option<N2Record<S>>,
}

/// Largest off-diagonal |LODF| in column `lo` with its row, ties broken by
/// the row branch's (from, to) key; `None` for island-causing columns.
fn column_max<S: Scalar>(
    lodf: &LodfMatrix<S>,
    refs: &[BranchRef],
    lo: usize,
) -> Option<(S, BranchRef)> {
    if lodf.is_island_causing(lo) {
        return None;
    }
    let mut best: Option<(S, BranchRef)> = None;
    for (lm, &branch) in refs.iter().enumerate() {
        let Some(phi) = lodf.get(lm, lo) else {
            continue;
        };
        let abs = phi.abs();
        let better = match &best {
            None => true,
            Some((b, arg)) => abs > *b || (abs == *b && branch.key() < arg.key()),
        };
        if better {
            best = Some((abs, branch));
        }
    }
    best
}

/// Scans every single-line outage. Numeric records come first, descending by
/// `max_abs_lodf` with ties broken by the outaged branch's (from, to) key;
/// island-causing records follow in key order.
pub fn n1_scan<S: Scalar>(network: &Network<S>) -> Result<Vec<N1Record<S>>> {
    let stack = SensitivityStack::build(network)?;
    let refs: Vec<BranchRef> = network.in_service().map(|b| b.to_ref()).collect();
    let mut records: Vec<N1Record<S>> = refs
        .par_iter()
        .map(
            |outage| match column_max(&stack.lodf, &refs, outage.index) {
                Some((max, argmax)) => N1Record {
                    outage: *outage,
                    max_abs_lodf: Some(max),
                    argmax: Some(argmax),
                    island_causing: false,
                },
                None => N1Record {
                    outage: *outage,
                    max_abs_lodf: None,
                    argmax: None,
                    island_causing: true,
                },
            },
        )
        .collect();
    records.sort_by(|a, b| match (a.max_abs_lodf, b.max_abs_lodf) {
        (Some(x), Some(y)) => y
            .partial_cmp(&x)
            .expect("finite LODF maxima")
            .then(a.outage.key().cmp(&b.outage.key())),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.outage.key().cmp(&b.outage.key()),
    });
    Ok(records)
}

/// Bottom-k non-islanding records, ascending by `max_abs_lodf` with the same
/// key tie-break; shorter than `k` when fewer records qualify.
pub fn least_critical<S: Scalar>(records: &[N1Record<S>], k: usize) -> Vec<N1Record<S>> {
    let mut kept: Vec<N1Record<S>> = records
        .iter()
        .filter(|r| !r.island_causing)
        .cloned()
        .collect();
    kept.sort_by(|a, b| {
        let x = a.max_abs_lodf.expect("non-islanding record");
        let y = b.max_abs_lodf.expect("non-islanding record");
        x.partial_cmp(&y)
            .expect("finite LODF maxima")
            .then(a.outage.key().cmp(&b.outage.key()))
    });
    kept.truncate(k);
    kept
}

/// Scans every ordered pair of outages by full rebuild: for each
/// non-islanding first outage the network is rebuilt without it and the LODF
/// matrix recomputed; the worst (second outage, impacted line) pair is
/// recorded, skipping seconds that island the reduced network. Networks with
/// fewer than three branches yield an empty scan.
pub fn n2_scan<S: Scalar>(network: &Network<S>) -> Result<N2Scan<S>> {
    n2_scan_excluding(network, &HashSet::new())
}

/// Ordered outage pair keyed by each branch's (from, to) endpoints.
pub type PairKey = ((u32, u32), (u32, u32));

/// [`n2_scan`] with an ordered-pair deny list keyed by endpoint tuples.
pub fn n2_scan_excluding<S: Scalar>(
    network: &Network<S>,
    deny: &HashSet<PairKey>,
) -> Result<N2Scan<S>> {
    if network.branch_count() < 3 {
        return Ok(N2Scan {
            records: Vec::new(),
            best: None,
        });
    }
    let base = SensitivityStack::build(network)?;
    let refs: Vec<BranchRef> = network.in_service().map(|b| b.to_ref()).collect();

    let records: Vec<N2Record<S>> = refs
        .par_iter()
        .map(|first| -> Result<Option<N2Record<S>>> {
            if base.lodf.is_island_causing(first.index) {
                return Ok(None);
            }
            let reduced = network.without_branch(first.index);
            let stack = SensitivityStack::build(&reduced)?;
            let reduced_refs: Vec<BranchRef> = reduced.in_service().map(|b| b.to_ref()).collect();
            let mut best: Option<(S, BranchRef, BranchRef)> = None;
            for second in &reduced_refs {
                if deny.contains(&(first.key(), second.key())) {
                    continue;
                }
                let Some((max, argmax)) = column_max(&stack.lodf, &reduced_refs, second.index)
                else {
                    continue;
                };
                let better = match &best {
                    None => true,
                    Some((b, s, a)) => {
                        max > *b || (max == *b && (second.key(), argmax.key()) < (s.key(), a.key()))
                    }
                };
                if better {
                    best = Some((max, *second, argmax));
                }
            }
            Ok(best.map(|(max, second, argmax)| N2Record {
                first: *first,
                second,
                max_abs_lodf: max,
                argmax,
                feasible: true,
            }))
        })
        .collect::<Result<Vec<Option<N2Record<S>>>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut records = records;
    records.sort_by(|a, b| {
        b.max_abs_lodf
            .partial_cmp(&a.max_abs_lodf)
            .expect("finite LODF maxima")
            .then((a.first.key(), a.second.key()).cmp(&(b.first.key(), b.second.key())))
    });
    let best = records.first().cloned();
    Ok(N2Scan { records, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{BranchDef, Bus};
    use approx::assert_relative_eq;

    fn net(slack: u32, edges: &[(u32, u32, f64)]) -> Network<f64> {
        let mut ids: Vec<u32> = edges.iter().flat_map(|&(a, b, _)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let buses = ids
            .into_iter()
            .map(|id| Bus {
                id,
                is_slack: id == slack,
            })
            .collect();
        let defs = edges
            .iter()
            .map(|&(a, b, x)| BranchDef::new(a, b, x))
            .collect();
        Network::new("test", buses, defs).unwrap()
    }

    fn case30() -> Network<f64> {
        crate::caseio::load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/../../cases/case30.m"))
            .unwrap()
    }

    #[test]
    fn triangle_scan_is_a_three_way_tie() {
        let records = n1_scan(&net(3, &[(1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.1)])).unwrap();
        assert_eq!(records.len(), 3);
        let keys: Vec<(u32, u32)> = records.iter().map(|r| r.outage.key()).collect();
        assert_eq!(keys, vec![(1, 2), (1, 3), (2, 3)]);
        for r in &records {
            assert_relative_eq!(r.max_abs_lodf.unwrap(), 1.0, max_relative = 1e-12);
            assert!(!r.island_causing);
        }
    }

    #[test]
    fn path_network_is_all_bridges() {
        let records = n1_scan(&net(1, &[(2, 3, 0.2), (1, 2, 0.1), (3, 4, 0.3)])).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.island_causing);
            assert!(r.max_abs_lodf.is_none() && r.argmax.is_none());
        }
        // Equally island-causing records fall back to the key tie-break.
        let keys: Vec<(u32, u32)> = records.iter().map(|r| r.outage.key()).collect();
        assert_eq!(keys, vec![(1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn island_records_sort_after_numeric_ones() {
        // Triangle plus a pendant: the pendant branch is the only bridge.
        let records = n1_scan(&net(
            1,
            &[(1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.1), (3, 4, 0.2)],
        ))
        .unwrap();
        assert_eq!(records.len(), 4);
        assert!(records[..3].iter().all(|r| !r.island_causing));
        assert!(records[3].island_causing);
        assert_eq!(records[3].outage.key(), (3, 4));
    }

    #[test]
    fn least_critical_orders_ascending_and_truncates() {
        let n = net(
            1,
            &[
                (1, 2, 0.1),
                (2, 3, 0.2),
                (1, 3, 0.15),
                (2, 4, 0.3),
                (3, 4, 0.25),
            ],
        );
        let records = n1_scan(&n).unwrap();
        let bottom = least_critical(&records, 2);
        assert_eq!(bottom.len(), 2);
        assert!(bottom[0].max_abs_lodf.unwrap() <= bottom[1].max_abs_lodf.unwrap());
        assert!(least_critical(&records, 0).is_empty());
        assert_eq!(least_critical(&records, 99).len(), 5);

        // The triangle's three maxima are 1.0 up to the last ulp; the bottom
        // record is one of them, whichever the arithmetic puts lowest.
        let tri = n1_scan(&net(3, &[(1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.1)])).unwrap();
        let bottom = &least_critical(&tri, 1)[0];
        assert!([(1, 2), (1, 3), (2, 3)].contains(&bottom.outage.key()));
        assert_relative_eq!(bottom.max_abs_lodf.unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ieee30_bottom_eight_matches_oracle_values() {
        let records = n1_scan(&case30()).unwrap();
        assert_eq!(records.len(), 41);
        let islands: Vec<(u32, u32)> = records
            .iter()
            .filter(|r| r.island_causing)
            .map(|r| r.outage.key())
            .collect();
        assert_eq!(islands, vec![(9, 11), (12, 13), (25, 26)]);

        let expected = [
            ((4, 6), 0.5064700689787839),
            ((12, 15), 0.540822582634944),
            ((6, 10), 0.5455565870971686),
            ((2, 4), 0.6041156448320417),
            ((22, 24), 0.6311398050392528),
            ((2, 6), 0.6909709528372483),
            ((6, 28), 0.8367191579323463),
            ((4, 12), 0.8525681761666621),
        ];
        let bottom = least_critical(&records, 8);
        for (record, (key, value)) in bottom.iter().zip(expected) {
            assert_eq!(record.outage.key(), key);
            assert_relative_eq!(record.max_abs_lodf.unwrap(), value, epsilon = 1e-9);
        }
    }

    #[test]
    fn n1_maxima_match_a_brute_column_scan() {
        let n = case30();
        let stack = SensitivityStack::build(&n).unwrap();
        let records = n1_scan(&n).unwrap();
        for r in records.iter().filter(|r| !r.island_causing) {
            let lo = r.outage.index;
            let mut brute = 0.0f64;
            for lm in 0..n.branch_count() {
                if let Some(phi) = stack.lodf.get(lm, lo) {
                    brute = brute.max(phi.abs());
                }
            }
            assert_eq!(r.max_abs_lodf.unwrap(), brute);
        }
    }

    #[test]
    fn tiny_networks_yield_empty_pair_scans() {
        let tri = net(3, &[(1, 2, 0.1), (2, 3, 0.1), (1, 3, 0.1)]);
        let scan = n2_scan(&tri).unwrap();
        assert!(scan.records.is_empty() && scan.best.is_none());

        let pair = net(2, &[(1, 2, 0.1), (1, 2, 0.2)]);
        let scan = n2_scan(&pair).unwrap();
        assert!(scan.records.is_empty() && scan.best.is_none());
    }

    #[test]
    fn square_ring_has_no_feasible_pair() {
        let c4 = net(1, &[(1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1), (1, 4, 0.1)]);
        let records = n1_scan(&c4).unwrap();
        for r in &records {
            assert_relative_eq!(r.max_abs_lodf.unwrap(), 1.0, max_relative = 1e-12);
        }
        let scan = n2_scan(&c4).unwrap();
        assert!(scan.records.is_empty() && scan.best.is_none());
    }

    #[test]
    fn pair_scan_agrees_with_explicit_rebuild() {
        let n = net(
            1,
            &[
                (1, 2, 0.1),
                (2, 3, 0.2),
                (1, 3, 0.15),
                (2, 4, 0.3),
                (3, 4, 0.25),
                (1, 4, 0.4),
            ],
        );
        let scan = n2_scan(&n).unwrap();
        for record in &scan.records {
            let reduced = n.without_branch(record.first.index);
            let stack = SensitivityStack::build(&reduced).unwrap();
            let refs: Vec<BranchRef> = reduced.in_service().map(|b| b.to_ref()).collect();
            let mut brute: Option<f64> = None;
            for second in &refs {
                if let Some((max, _)) = column_max(&stack.lodf, &refs, second.index) {
                    brute = Some(brute.map_or(max, |b: f64| b.max(max)));
                }
            }
            assert_relative_eq!(record.max_abs_lodf, brute.unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn deleting_the_best_pair_promotes_the_runner_up() {
        let n = net(
            1,
            &[
                (1, 2, 0.1),
                (2, 3, 0.2),
                (1, 3, 0.15),
                (2, 4, 0.3),
                (3, 4, 0.25),
                (1, 4, 0.4),
            ],
        );
        let scan = n2_scan(&n).unwrap();
        let best = scan.best.clone().unwrap();

        // Brute list of every feasible ordered pair's value.
        let mut pairs: Vec<(PairKey, f64)> = Vec::new();
        for first in n.in_service().map(|b| b.to_ref()).collect::<Vec<_>>() {
            let base = SensitivityStack::build(&n).unwrap();
            if base.lodf.is_island_causing(first.index) {
                continue;
            }
            let reduced = n.without_branch(first.index);
            let stack = SensitivityStack::build(&reduced).unwrap();
            let refs: Vec<BranchRef> = reduced.in_service().map(|b| b.to_ref()).collect();
            for second in &refs {
                if let Some((max, _)) = column_max(&stack.lodf, &refs, second.index) {
                    pairs.push(((first.key(), second.key()), max));
                }
            }
        }
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        assert_eq!(pairs[0].0, (best.first.key(), best.second.key()));

        let mut deny = HashSet::new();
        deny.insert((best.first.key(), best.second.key()));
        let rerun = n2_scan_excluding(&n, &deny).unwrap();
        let promoted = rerun.best.unwrap();
        assert_eq!((promoted.first.key(), promoted.second.key()), pairs[1].0);
        assert_relative_eq!(promoted.max_abs_lodf, pairs[1].1, epsilon = 1e-12);
    }

    #[test]
    fn ieee30_pair_scan_reaches_the_unity_plateau() {
        let scan = n2_scan(&case30()).unwrap();
        assert!(!scan.records.is_empty());
        let best = scan.best.unwrap();
        assert!(best.feasible);
        assert_relative_eq!(best.max_abs_lodf, 1.0, epsilon = 1e-9);
        // Every record's maximum is bounded by the plateau up to noise.
        for r in &scan.records {
            assert!(r.max_abs_lodf <= 1.0 + 1e-9);
        }
    }
}
