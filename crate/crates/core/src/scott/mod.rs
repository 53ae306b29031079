//! Back-and-forth pseudo-distances on finite structures, their stabilization
//! stage, and the threshold operator whose least fixed point they govern.

mod fixpoint;
mod table;

use std::collections::HashSet;

use num::bigint::BigInt;
use num::{Integer, One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{DenseFamilyIndex, FamilyEnumerator, FamilyMember};
use crate::evaluation::eval_formula_value;
use crate::modulus::{induced_modulus_exact, pi_fold, ModulusSpec, WeakModulus};
use crate::numeric::{rat, Rational};
use crate::structures::{all_tuples, PreStructure};
use crate::syntax::{Formula, RespectCheck, Signature};

pub use fixpoint::{
    gamma_fixpoint, gamma_fixpoint_from, oracle_equivalence, oracle_equivalence_with, Discrepancy,
    EquivalenceReport, FixpointTrace, StageInfo,
};
pub use table::{r_alpha, r_successor, scott_rank, triangle, BFTable, RankReport, TableError};

/// Resolution and truncation parameters shared by every analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisConfig {
    pub omega: WeakModulus,
    /// Members of the dense family used for stage 0, per arity.
    pub family_size: usize,
    /// Stage `a` is computed at arities `n` with `n + a <= max_arity`.
    pub max_arity: usize,
    pub stage_cap: usize,
    /// Grid step of the induced-modulus grid route.
    pub grid: Rational,
    pub k_max: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            omega: WeakModulus::Sum,
            family_size: 200,
            max_arity: 3,
            stage_cap: 8,
            grid: rat(1, 16),
            k_max: 8,
        }
    }
}

impl AnalysisConfig {
    pub fn family_index(&self, arity: usize, sig: &Signature) -> DenseFamilyIndex {
        let mut idx = DenseFamilyIndex::new(arity, self.omega, sig.clone());
        idx.induced = RespectCheck {
            omega: self.omega,
            grid_step: self.grid.clone(),
            max_points: 1024,
            x_step: self.grid.clone(),
            r_step: self.grid.clone(),
            k_max: self.k_max,
        };
        idx
    }
}

/// Bookkeeping attached to a stage-0 table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct R0Meta {
    pub family_size: usize,
    /// Members actually evaluated: the first `family_size` of each family of
    /// arity at most `n`.
    pub members_used: usize,
    /// Whether the closed form below applies (empty signature, sum modulus).
    pub closed_form_available: bool,
}

/// The family members used at arity `n`: for each `m <= n`, the first
/// `family_size` members of the `m`-ary family, with their atomics.
pub struct StageZeroFamily {
    parts: Vec<(Vec<Formula>, Vec<FamilyMember>)>,
}

impl StageZeroFamily {
    pub fn new(sig: &Signature, arity: usize, config: &AnalysisConfig) -> Self {
        let parts = (1..=arity)
            .map(|m| {
                let mut e = FamilyEnumerator::new(config.family_index(m, sig));
                let members = e.take(config.family_size);
                let atomics = e.atomics().into_iter().cloned().collect();
                (atomics, members)
            })
            .collect();
        StageZeroFamily { parts }
    }

    pub fn members(&self) -> usize {
        self.parts.iter().map(|(_, m)| m.len()).sum()
    }

    /// Values of every member at `tuple`, in a fixed order.
    pub fn profile(&self, s: &PreStructure, tuple: &[usize]) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.members());
        for (m, (atomics, members)) in self.parts.iter().enumerate() {
            let prefix = &tuple[..m + 1];
            let vals: Vec<Rational> = atomics
                .iter()
                .map(|a| eval_formula_value(a, s, prefix).expect("family atomics are closed"))
                .collect();
            out.extend(members.iter().map(|f| f.eval_with(&vals)));
        }
        out
    }
}

fn profile_distance(p: &[Rational], q: &[Rational]) -> Rational {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// One member's values across all tuples as integers over a shared
/// denominator.
struct Column {
    den: i64,
    nums: Vec<i64>,
}

fn integer_column(vals: &[Rational]) -> Option<Column> {
    let mut l = BigInt::one();
    for v in vals {
        l = l.lcm(v.denom());
    }
    let den = l.to_i64()?;
    let nums = vals
        .iter()
        .map(|v| (v.numer() * (&l / v.denom())).to_i64())
        .collect::<Option<Vec<i64>>>()?;
    Some(Column { den, nums })
}

/// Largest `|c[a] - c[b]|` over the columns, as a reduced rational.
fn column_gap(ints: &[Column], rats: &[Vec<Rational>], a: usize, b: usize) -> Rational {
    // best = bn / bd, compared by cross multiplication.
    let (mut bn, mut bd) = (0i128, 1i128);
    for c in ints {
        let diff = (c.nums[a] - c.nums[b]).unsigned_abs() as i128;
        if diff * bd > bn * c.den as i128 {
            bn = diff;
            bd = c.den as i128;
        }
    }
    let mut best = Rational::new(bn as i64, bd as i64);
    for c in rats {
        best = best.max((&c[a] - &c[b]).abs());
    }
    best
}

/// Stage-0 table at `arity`: `r0(a, b) = max_phi |phi(a) - phi(b)|` over the
/// truncated family.
pub fn r0_table(s: &PreStructure, arity: usize, config: &AnalysisConfig) -> BFTable {
    let family = StageZeroFamily::new(s.signature(), arity, config);
    let tuples = all_tuples(s.len(), arity);
    let t = tuples.len();
    let profiles: Vec<Vec<Rational>> = tuples.par_iter().map(|tu| family.profile(s, tu)).collect();
    // Members that agree on every tuple, or are constant, add nothing.
    let mut seen = HashSet::new();
    let mut ints = Vec::new();
    let mut rats = Vec::new();
    for m in 0..family.members() {
        let col: Vec<Rational> = profiles.iter().map(|p| p[m].clone()).collect();
        if col.iter().all(|v| v == &col[0]) || !seen.insert(col.clone()) {
            continue;
        }
        match integer_column(&col) {
            Some(c) => ints.push(c),
            None => rats.push(col),
        }
    }
    let upper: Vec<Rational> = (0..t * t)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / t, k % t);
            if a < b {
                column_gap(&ints, &rats, a, b)
            } else {
                Rational::zero()
            }
        })
        .collect();
    let values = (0..t * t)
        .map(|k| {
            let (a, b) = (k / t, k % t);
            upper[a.min(b) * t + a.max(b)].clone()
        })
        .collect();
    BFTable::new(s.len(), arity, 0, values).with_meta(R0Meta {
        family_size: config.family_size,
        members_used: family.members(),
        closed_form_available: closed_form_applies(s, config.omega),
    })
}

/// `r0(a, b)` for one pair, with its metadata.
pub fn r0(
    s: &PreStructure,
    a: &[usize],
    b: &[usize],
    config: &AnalysisConfig,
) -> Result<(Rational, R0Meta), TableError> {
    if a.len() != b.len() {
        return Err(TableError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let family = StageZeroFamily::new(s.signature(), a.len(), config);
    let v = profile_distance(&family.profile(s, a), &family.profile(s, b));
    Ok((
        v,
        R0Meta {
            family_size: config.family_size,
            members_used: family.members(),
            closed_form_available: closed_form_applies(s, config.omega),
        },
    ))
}

/// The modulus `g` of the closed form below: the exact induced modulus of
/// the atomics `d(v_i, v_j)`, `i < j`, under the sum modulus.
fn closed_form_modulus(arity: usize) -> Option<ModulusSpec> {
    let mut moduli = Vec::new();
    for i in 0..arity {
        for j in i + 1..arity {
            let mut c = vec![Rational::zero(); arity];
            c[i] = Rational::one();
            c[j] = Rational::one();
            moduli.push(ModulusSpec::linear(c).expect("nonnegative"));
        }
    }
    if moduli.is_empty() {
        return None;
    }
    induced_modulus_exact(&moduli, WeakModulus::Sum)
}

fn closed_form_with(
    g: Option<&ModulusSpec>,
    s: &PreStructure,
    a: &[usize],
    b: &[usize],
) -> Rational {
    let Some(g) = g else {
        return Rational::zero();
    };
    let n = a.len();
    let mut diffs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            diffs.push(s.dist(a[i], a[j]) - s.dist(b[i], b[j]));
        }
    }
    g.value(&pi_fold(&diffs)).min(Rational::one())
}

fn closed_form_applies(s: &PreStructure, omega: WeakModulus) -> bool {
    s.signature().is_empty() && omega == WeakModulus::Sum
}

/// The supremum defining `r0` for the empty signature and sum modulus:
/// `min(1, g(|d(a) - d(b)|))` where `d(a)` lists `d(a_i, a_j)` for `i < j`
/// and `g` is the exact induced modulus of those atomics. Returns `None`
/// for other signatures or moduli.
pub fn r0_closed_form(
    s: &PreStructure,
    a: &[usize],
    b: &[usize],
    omega: WeakModulus,
) -> Option<Rational> {
    if !closed_form_applies(s, omega) || a.len() != b.len() {
        return None;
    }
    let g = closed_form_modulus(a.len());
    Some(closed_form_with(g.as_ref(), s, a, b))
}

/// [`r0_closed_form`] on every pair of `arity`-tuples.
pub fn closed_form_table(s: &PreStructure, arity: usize, omega: WeakModulus) -> Option<BFTable> {
    if !closed_form_applies(s, omega) {
        return None;
    }
    let g = closed_form_modulus(arity);
    let tuples = all_tuples(s.len(), arity);
    let t = tuples.len();
    let values = (0..t * t)
        .into_par_iter()
        .map(|k| closed_form_with(g.as_ref(), s, &tuples[k / t], &tuples[k % t]))
        .collect();
    Some(BFTable::new(s.len(), arity, 0, values))
}

/// Largest gap between the closed form and the stage-0 tables. Every later
/// stage inherits this bound, as one back-and-forth step is 1-Lipschitz in
/// the sup norm.
pub fn certified_slack(
    s: &PreStructure,
    r0_tables: &[BFTable],
    omega: WeakModulus,
) -> Option<Rational> {
    let mut slack = Rational::zero();
    for table in r0_tables {
        let exact = closed_form_table(s, table.arity, omega)?;
        for (e, v) in exact.values().iter().zip(table.values()) {
            if e - v > slack {
                slack = e - v;
            }
        }
    }
    Some(slack)
}

/// The maximum over index pairs `i < j` of `|d(a_i, a_j) - d(b_i, b_j)|`.
pub fn max_pairwise_gap(s: &PreStructure, a: &[usize], b: &[usize]) -> Rational {
    let n = a.len();
    let mut best = Rational::zero();
    for i in 0..n {
        for j in i + 1..n {
            best = best.max((s.dist(a[i], a[j]) - s.dist(b[i], b[j])).abs());
        }
    }
    best
}
