use serde::Serialize;

use super::table::{triangle, BFTable};
use super::{r0_table, AnalysisConfig};
use crate::numeric::Rational;
use crate::structures::PreStructure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageInfo {
    pub stage: usize,
    /// Pairs in `I^stage`, counting pairs of unequal length.
    pub size: usize,
    pub added: usize,
}

/// Iterates of `Gamma_q` from the empty set on pairs of tuples of length
/// `1..=max_arity`.
///
/// A pair enters `I^0` when the lengths differ or `r_0 > q`, and enters
/// `I^{k+1}` when some `c, d` make `(ac, bd')` or `(ac', bd)` lie in `I^k`
/// for all `c', d'`. Pairs of the top arity have no extensions, so the
/// arity-`n` slice is frozen after stage `max_arity - n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixpointTrace {
    pub q: Rational,
    pub points: usize,
    pub max_arity: usize,
    pub stage_cap: usize,
    pub stages: Vec<StageInfo>,
    /// First `k` with `I^{k+1} = I^k`, if reached within the stage cap.
    pub closure_stage: Option<usize>,
    pub mismatched_pairs: usize,
    /// `entries[n - 1][a * t + b]` is the entry stage of the pair of
    /// `n`-tuples with ranks `a` and `b`.
    #[serde(skip)]
    pub entries: Vec<Vec<Option<usize>>>,
}

impl FixpointTrace {
    pub fn entry(&self, a: usize, b: usize, arity: usize) -> Option<usize> {
        let t = self.points.pow(arity as u32);
        self.entries[arity - 1][a * t + b]
    }
}

fn mismatched_pairs(points: usize, top: usize) -> usize {
    let counts: Vec<usize> = (1..=top).map(|n| points.pow(n as u32)).collect();
    let total: usize = counts.iter().sum();
    total * total - counts.iter().map(|c| c * c).sum::<usize>()
}

/// Runs `Gamma_q` to its least fixed point (or the stage cap) given the
/// stage-0 tables at arities `1..=max_arity`.
pub fn gamma_fixpoint_from(r0: &[BFTable], q: &Rational, stage_cap: usize) -> FixpointTrace {
    let top = r0.len();
    let p = r0.first().map_or(0, |t| t.points);
    let mut entries: Vec<Vec<Option<usize>>> = r0
        .iter()
        .map(|t| t.values().iter().map(|v| (v > q).then_some(0)).collect())
        .collect();
    let mismatched = mismatched_pairs(p, top);
    let count = |e: &[Vec<Option<usize>>]| -> usize {
        mismatched + e.iter().flatten().filter(|x| x.is_some()).count()
    };
    let mut stages = vec![StageInfo {
        stage: 0,
        size: count(&entries),
        added: count(&entries),
    }];
    let mut closure_stage = None;
    for k in 0..stage_cap {
        let mut added = 0;
        let mut next = entries.clone();
        for n in 1..top {
            let t = p.pow(n as u32);
            let member = |a: usize, b: usize| entries[n][a * t * p + b].is_some();
            for a in 0..t {
                for b in 0..t {
                    if next[n - 1][a * t + b].is_some() {
                        continue;
                    }
                    let hit = (0..p).any(|c| {
                        (0..p).any(|d| {
                            (0..p).all(|c2| {
                                (0..p).all(|d2| {
                                    member(a * p + c, b * p + d2) || member(a * p + c2, b * p + d)
                                })
                            })
                        })
                    });
                    if hit {
                        next[n - 1][a * t + b] = Some(k + 1);
                        added += 1;
                    }
                }
            }
        }
        entries = next;
        if added == 0 {
            closure_stage = Some(k);
            break;
        }
        stages.push(StageInfo {
            stage: k + 1,
            size: count(&entries),
            added,
        });
    }
    FixpointTrace {
        q: q.clone(),
        points: p,
        max_arity: top,
        stage_cap,
        stages,
        closure_stage,
        mismatched_pairs: mismatched,
        entries,
    }
}

/// [`gamma_fixpoint_from`] with stage-0 tables computed from `s`.
pub fn gamma_fixpoint(s: &PreStructure, q: &Rational, config: &AnalysisConfig) -> FixpointTrace {
    let r0: Vec<BFTable> = (1..=config.max_arity)
        .map(|n| r0_table(s, n, config))
        .collect();
    gamma_fixpoint_from(&r0, q, config.stage_cap)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub arity: usize,
    pub left: usize,
    pub right: usize,
    pub entry_stage: Option<usize>,
    /// Least `a` with `r_a > q`.
    pub threshold_stage: Option<usize>,
}

/// Comparison of `Gamma_q` entry stages with `min { a : r_a > q }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub q: Rational,
    pub pairs_checked: usize,
    pub discrepancies: Vec<Discrepancy>,
    pub closure_stage: Option<usize>,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Checks that a pair of equal-length tuples enters the fixed point at
/// exactly the first stage where its pseudo-distance exceeds `q`, over the
/// triangle shared by both computations. Unequal-length pairs enter at
/// stage 0 by definition and are counted as checked.
pub fn oracle_equivalence(
    s: &PreStructure,
    q: &Rational,
    config: &AnalysisConfig,
) -> EquivalenceReport {
    oracle_equivalence_with(&triangle(s, config), q, config.stage_cap)
}

/// [`oracle_equivalence`] over precomputed [`triangle`] tables.
pub fn oracle_equivalence_with(
    tables: &[Vec<BFTable>],
    q: &Rational,
    stage_cap: usize,
) -> EquivalenceReport {
    let trace = gamma_fixpoint_from(&tables[0], q, stage_cap);
    let points = trace.points;
    let mut discrepancies = Vec::new();
    let mut checked = trace.mismatched_pairs;
    for n in 1..=tables[0].len() {
        let t = points.pow(n as u32);
        for a in 0..t {
            for b in 0..t {
                let threshold_stage = tables
                    .iter()
                    .enumerate()
                    .filter(|(_, row)| row.len() >= n)
                    .find(|(_, row)| row[n - 1].at_index(a, b) > q)
                    .map(|(k, _)| k);
                let entry_stage = trace.entry(a, b, n);
                checked += 1;
                if entry_stage != threshold_stage {
                    discrepancies.push(Discrepancy {
                        arity: n,
                        left: a,
                        right: b,
                        entry_stage,
                        threshold_stage,
                    });
                }
            }
        }
    }
    EquivalenceReport {
        q: q.clone(),
        pairs_checked: checked,
        discrepancies,
        closure_stage: trace.closure_stage,
    }
}
