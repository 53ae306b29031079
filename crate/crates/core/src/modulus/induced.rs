//! The modulus a connective must respect so that `u(phi_0, ..., phi_{k-1})`
//! respects a weak modulus, given the moduli of the atomic formulas.
//!
//! With `f(r) = inf { Omega_n(x) : Delta_i(x) >= r_i for all i }`, a connective
//! `u` makes the formula respect `Omega` exactly when `u` respects the largest
//! modulus below `f`.
//!
//! When every atomic modulus is linear and `Omega` is `sum` or `max`, `f` is
//! the value function of a linear program: convex and positively homogeneous,
//! hence already subadditive. It is computed exactly as a maximum of linear
//! forms. Other inputs go through the grid pipeline.

use serde::Serialize;
use thiserror::Error;

use super::envelope::{largest_modulus_below, EnvelopeError, GridFunction};
use super::{ModulusSpec, WeakModulus};
use crate::numeric::{grid_points, RatGrid, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InducedError {
    #[error("atomic modulus {0} is identically zero; substitute its constant value first")]
    ZeroAtomic(usize),
    #[error("atomic moduli have mixed arities")]
    MixedArity,
    #[error("envelope: {0}")]
    Envelope(#[from] EnvelopeError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum InducedRoute {
    /// Closed form from the linear program's dual vertices.
    Exact,
    /// Sampled minimisation followed by the grid envelope.
    Grid {
        x_step: Rational,
        r_step: Rational,
        k_max: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedModulus {
    pub modulus: ModulusSpec,
    pub route: InducedRoute,
}

impl InducedModulus {
    /// Exact when possible, otherwise the grid pipeline with the given resolution.
    pub fn compute(
        atomic: &[ModulusSpec],
        omega: WeakModulus,
        x_step: &Rational,
        r_step: &Rational,
        k_max: usize,
    ) -> Result<Self, InducedError> {
        check_atomics(atomic)?;
        if let Some(modulus) = induced_modulus_exact(atomic, omega) {
            return Ok(InducedModulus {
                modulus,
                route: InducedRoute::Exact,
            });
        }
        induced_connective_modulus(atomic, omega, x_step, r_step, k_max)
    }
}

fn check_atomics(atomic: &[ModulusSpec]) -> Result<usize, InducedError> {
    let n = atomic.first().map_or(0, ModulusSpec::arity);
    if atomic.iter().any(|m| m.arity() != n) {
        return Err(InducedError::MixedArity);
    }
    if let Some(i) = atomic.iter().position(ModulusSpec::is_identically_zero) {
        return Err(InducedError::ZeroAtomic(i));
    }
    Ok(n)
}

/// Grid pipeline: tabulate `f` on the `r`-grid by minimising over the
/// `x`-grid, then take the largest modulus below it.
pub fn induced_connective_modulus(
    atomic: &[ModulusSpec],
    omega: WeakModulus,
    x_step: &Rational,
    r_step: &Rational,
    k_max: usize,
) -> Result<InducedModulus, InducedError> {
    let n = check_atomics(atomic)?;
    let k = atomic.len();
    let slice = omega.slice(n);
    let xs: Vec<(Vec<Rational>, Rational)> = grid_points(&RatGrid::unit(n, x_step.clone()))
        .into_iter()
        .map(|x| {
            let levels: Vec<Rational> = atomic.iter().map(|m| m.value(&x)).collect();
            (levels, slice.value(&x))
        })
        .collect();
    let r_grid = RatGrid::unit(k, r_step.clone());
    let values = grid_points(&r_grid)
        .iter()
        .map(|r| {
            xs.iter()
                .filter(|(levels, _)| levels.iter().zip(r).all(|(l, ri)| l >= ri))
                .map(|(_, w)| w.clone())
                .min()
        })
        .collect();
    let f = GridFunction {
        grid: r_grid,
        values,
    };
    let env = largest_modulus_below(&f, k_max)?;
    Ok(InducedModulus {
        modulus: env.modulus,
        route: InducedRoute::Grid {
            x_step: x_step.clone(),
            r_step: r_step.clone(),
            k_max,
        },
    })
}

/// Exact induced modulus for linear atomic moduli, or `None` when the inputs
/// are outside the closed-form cases.
pub fn induced_modulus_exact(atomic: &[ModulusSpec], omega: WeakModulus) -> Option<ModulusSpec> {
    let n = atomic.first().map_or(0, ModulusSpec::arity);
    if atomic
        .iter()
        .any(|m| m.arity() != n || m.is_identically_zero())
    {
        return None;
    }
    let rows: Vec<Vec<Rational>> = atomic
        .iter()
        .map(|m| m.as_linear(n))
        .collect::<Option<_>>()?;
    let k = rows.len();
    if k == 0 {
        return Some(ModulusSpec::zero(0));
    }
    match omega {
        // min sum(x) s.t. C x >= r, x >= 0  ==  max r.y s.t. C^T y <= 1, y >= 0.
        WeakModulus::Sum => {
            let vertices = dual_vertices(&rows, n);
            let ops = vertices
                .into_iter()
                .map(|y| ModulusSpec::linear(y).expect("dual vertices are nonnegative"))
                .collect();
            Some(ModulusSpec::max_of(ops).ok()?.simplify())
        }
        // min t s.t. C x >= r, 0 <= x <= t: the optimum is x = t * 1, so
        // f(r) = max_i r_i / rowsum_i.
        WeakModulus::Max => {
            let ops = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let total: Rational = row.iter().sum();
                    let mut c = vec![Rational::zero(); k];
                    c[i] = Rational::one() / total;
                    ModulusSpec::linear(c).expect("positive")
                })
                .collect();
            Some(ModulusSpec::max_of(ops).ok()?.simplify())
        }
    }
}

/// Vertices of `{ y >= 0 : sum_i rows[i][j] y_i <= 1 for every j }`.
fn dual_vertices(rows: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let k = rows.len();
    // Constraint c: a.y <= b. The first n are the primal columns, the last k are -y_i <= 0.
    let mut constraints: Vec<(Vec<Rational>, Rational)> = (0..n)
        .map(|j| (rows.iter().map(|r| r[j].clone()).collect(), Rational::one()))
        .collect();
    for i in 0..k {
        let mut a = vec![Rational::zero(); k];
        a[i] = -Rational::one();
        constraints.push((a, Rational::zero()));
    }
    let mut out = Vec::new();
    for subset in combinations(constraints.len(), k) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&c| constraints[c].0.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|&c| constraints[c].1.clone()).collect();
        let Some(y) = solve(a, b) else { continue };
        let feasible = constraints.iter().all(|(a, b)| {
            let lhs: Rational = a.iter().zip(&y).map(|(p, q)| p * q).sum();
            lhs <= *b
        });
        if feasible && !out.contains(&y) {
            out.push(y);
        }
    }
    out
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact Gaussian elimination; `None` for singular systems.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..n {
                    let delta = &factor * &a[col][j];
                    a[r][j] = &a[r][j] - &delta;
                }
                let delta = &factor * &b[col];
                b[r] = &b[r] - &delta;
            }
        }
    }
    Some(b)
}
