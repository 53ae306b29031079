use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{r0_table, AnalysisConfig, R0Meta};
use crate::numeric::Rational;
use crate::structures::{tuple_index, PreStructure};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("tuples of lengths {left} and {right} are not comparable")]
    LengthMismatch { left: usize, right: usize },
    #[error("tuple of length {found} used with a table of arity {arity}")]
    Arity { arity: usize, found: usize },
    #[error("point index {0} out of range")]
    Point(usize),
    #[error("stage {stage} at arity {arity} lies outside the computed triangle")]
    OutsideTriangle { stage: usize, arity: usize },
}

/// Values of `r_stage` on all pairs of `arity`-tuples, indexed by the
/// lexicographic ranks of the two tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BFTable {
    pub points: usize,
    pub arity: usize,
    pub stage: usize,
    #[serde(skip)]
    values: Vec<Rational>,
    pub r0_meta: Option<R0Meta>,
}

impl BFTable {
    pub fn new(points: usize, arity: usize, stage: usize, values: Vec<Rational>) -> Self {
        let t = points.pow(arity as u32);
        assert_eq!(values.len(), t * t, "table size");
        BFTable {
            points,
            arity,
            stage,
            values,
            r0_meta: None,
        }
    }

    pub fn with_meta(mut self, meta: R0Meta) -> Self {
        self.r0_meta = Some(meta);
        self
    }

    /// Number of `arity`-tuples.
    pub fn tuples(&self) -> usize {
        self.points.pow(self.arity as u32)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at_index(&self, a: usize, b: usize) -> &Rational {
        &self.values[a * self.tuples() + b]
    }

    pub fn get(&self, a: &[usize], b: &[usize]) -> Result<&Rational, TableError> {
        for t in [a, b] {
            if t.len() != self.arity {
                return Err(TableError::Arity {
                    arity: self.arity,
                    found: t.len(),
                });
            }
            if let Some(&p) = t.iter().find(|&&p| p >= self.points) {
                return Err(TableError::Point(p));
            }
        }
        Ok(self.at_index(tuple_index(self.points, a), tuple_index(self.points, b)))
    }

    pub fn max_value(&self) -> Rational {
        self.values
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// One back-and-forth step: from `r` at arity `n + 1` to arity `n`,
///
/// `r'(a, b) = max( max_c min_d r(ac, bd), max_d min_c r(ac, bd) )`.
///
/// This equals the sup-inf over `(c, d)` and `(c', d')` of
/// `max(r(ac, bd'), r(ac', bd))` because the two terms separate.
pub fn r_successor(next: &BFTable) -> BFTable {
    assert!(next.arity >= 1, "successor needs arity at least 1");
    let p = next.points;
    let n = next.arity - 1;
    let t = p.pow(n as u32);
    let values: Vec<Rational> = (0..t * t)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / t, k % t);
            let forth = (0..p)
                .map(|c| {
                    (0..p)
                        .map(|d| next.at_index(a * p + c, b * p + d))
                        .min()
                        .expect("nonempty")
                })
                .max()
                .expect("nonempty");
            let back = (0..p)
                .map(|d| {
                    (0..p)
                        .map(|c| next.at_index(a * p + c, b * p + d))
                        .min()
                        .expect("nonempty")
                })
                .max()
                .expect("nonempty");
            forth.max(back).clone()
        })
        .collect();
    BFTable::new(p, n, next.stage + 1, values)
}

/// Tables `r_a` at arity `n` for `1 <= n` and `n + a <= max_arity`, with
/// `a <= stage_cap`. Indexed as `result[a][n - 1]`.
pub fn triangle(s: &PreStructure, config: &AnalysisConfig) -> Vec<Vec<BFTable>> {
    let top = config.max_arity;
    if top == 0 {
        return Vec::new();
    }
    let mut stages = vec![(1..=top)
        .map(|n| r0_table(s, n, config))
        .collect::<Vec<_>>()];
    for a in 1..=config.stage_cap.min(top - 1) {
        let prev = &stages[a - 1];
        let row: Vec<BFTable> = (1..=top - a).map(|n| r_successor(&prev[n])).collect();
        stages.push(row);
    }
    stages
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    /// Least stage `a` with `r_a = r_{a+1}` at every arity where both are
    /// computed; `None` if no computed pair of stages agrees.
    pub rank: Option<usize>,
    pub max_arity: usize,
    pub stage_cap: usize,
    /// Highest stage computed at arity 1.
    pub stages_computed: usize,
    /// `max r_a` at arity 1, one entry per stage.
    pub arity_one_max: Vec<Rational>,
    pub family_size: usize,
}

impl RankReport {
    pub fn is_partial(&self) -> bool {
        self.rank.is_none()
    }
}

/// Stabilization stage of the back-and-forth pseudo-distances within the
/// triangle computed by [`triangle`].
pub fn scott_rank(s: &PreStructure, config: &AnalysisConfig) -> (RankReport, Vec<Vec<BFTable>>) {
    let tables = triangle(s, config);
    let rank = (0..tables.len().saturating_sub(1)).find(|&a| {
        tables[a + 1]
            .iter()
            .zip(&tables[a])
            .all(|(hi, lo)| hi.values == lo.values)
    });
    let report = RankReport {
        rank,
        max_arity: config.max_arity,
        stage_cap: config.stage_cap,
        stages_computed: tables.len().saturating_sub(1),
        arity_one_max: tables.iter().map(|row| row[0].max_value()).collect(),
        family_size: config.family_size,
    };
    (report, tables)
}

/// `r_stage(a, b)` computed through the triangle needed for it.
pub fn r_alpha(
    s: &PreStructure,
    stage: usize,
    a: &[usize],
    b: &[usize],
    config: &AnalysisConfig,
) -> Result<Rational, TableError> {
    if a.len() != b.len() {
        return Err(TableError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n == 0 || n + stage > config.max_arity || stage > config.stage_cap {
        return Err(TableError::OutsideTriangle { stage, arity: n });
    }
    let mut table = r0_table(s, n + stage, config);
    for _ in 0..stage {
        table = r_successor(&table);
    }
    table.get(a, b).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn brute_successor(next: &BFTable) -> BFTable {
        let p = next.points;
        let t = p.pow(next.arity as u32 - 1);
        let mut values = Vec::new();
        for a in 0..t {
            for b in 0..t {
                let mut sup = Rational::zero();
                for c in 0..p {
                    for d in 0..p {
                        let mut inf = Rational::one();
                        for c2 in 0..p {
                            for d2 in 0..p {
                                let v = next
                                    .at_index(a * p + c, b * p + d2)
                                    .clone()
                                    .max(next.at_index(a * p + c2, b * p + d).clone());
                                inf = inf.min(v);
                            }
                        }
                        sup = sup.max(inf);
                    }
                }
                values.push(sup);
            }
        }
        BFTable::new(p, next.arity - 1, next.stage + 1, values)
    }

    #[test]
    fn split_form_matches_four_quantifier_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in 1..=3usize {
            for arity in 1..=2u32 {
                let t = p.pow(arity);
                let values = (0..t * t).map(|_| rat(rng.gen_range(0..=8), 8)).collect();
                let table = BFTable::new(p, arity as usize, 0, values);
                assert_eq!(r_successor(&table), brute_successor(&table));
            }
        }
    }
}
