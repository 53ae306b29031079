use serde::Serialize;
use thiserror::Error;

use super::lattice::LatticeTerm;
use super::segment::SegmentConnective;
use crate::modulus::{pi_fold, ModulusSpec};
use crate::numeric::{grid_points, RatGrid, Rational};

/// Values of a target function on the grid `{0, step, ..., 1}^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGridFunction {
    pub step: Rational,
    pub points: Vec<Vec<Rational>>,
    pub values: Vec<Rational>,
}

impl UnitGridFunction {
    pub fn sample<F>(arity: usize, step: Rational, f: F) -> Self
    where
        F: Fn(&[Rational]) -> Rational,
    {
        let points = grid_points(&RatGrid::unit(arity, step.clone()));
        let values = points.iter().map(|p| f(p)).collect();
        UnitGridFunction {
            step,
            points,
            values,
        }
    }

    pub fn arity(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("target value {0} outside [0,1]")]
    OutOfRange(Rational),
    #[error("modulus arity {modulus} differs from target arity {target}")]
    Arity { modulus: usize, target: usize },
    #[error("target does not respect the modulus at {x:?}, {y:?}: {lhs} > {rhs}")]
    NotRespecting {
        x: Vec<Rational>,
        y: Vec<Rational>,
        lhs: Rational,
        rhs: Rational,
    },
    #[error("budget of {budget} leaves exhausted; best grid deviation {best_deviation}")]
    OverBudget {
        budget: usize,
        best_deviation: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Approximation {
    #[serde(serialize_with = "crate::dense::approx::display")]
    pub term: LatticeTerm,
    /// `max |h - u|` over the grid.
    pub deviation: Rational,
    pub leaves: usize,
    pub step: Rational,
}

pub(crate) fn display<S: serde::Serializer>(t: &LatticeTerm, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(t)
}

/// Default leaf budget: one leaf per ordered pair of grid points.
pub fn default_budget(u: &UnitGridFunction) -> usize {
    u.points.len() * u.points.len()
}

/// Segment through `(x, ux)` and `(y, uy)`.
fn interpolant(
    delta: &ModulusSpec,
    x: &[Rational],
    ux: &Rational,
    y: &[Rational],
    uy: &Rational,
) -> SegmentConnective {
    let built = if ux <= uy {
        SegmentConnective::new(
            delta.clone(),
            x.to_vec(),
            y.to_vec(),
            ux.clone(),
            uy.clone(),
        )
    } else {
        SegmentConnective::new(
            delta.clone(),
            y.to_vec(),
            x.to_vec(),
            uy.clone(),
            ux.clone(),
        )
    };
    built.expect("respect precheck guarantees the side condition")
}

fn argmax(diff: impl Iterator<Item = Rational>) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for (i, d) in diff.enumerate() {
        if best.as_ref().map_or(true, |(_, b)| d > *b) {
            best = Some((i, d));
        }
    }
    best
}

/// Builds a lattice term `h` over segments of `delta` with
/// `max_grid |h - u| < eps`.
///
/// For each chosen centre `x`, `k_x` is a meet of segments interpolating `u`
/// at `x` and at greedily chosen `y` until `k_x < u + eps` on the grid;
/// `h` is the join of greedily chosen `k_x` until `h > u - eps`.
pub fn lattice_approximate(
    u: &UnitGridFunction,
    delta: &ModulusSpec,
    eps: &Rational,
    budget: usize,
) -> Result<Approximation, ApproxError> {
    let k = u.arity();
    if delta.arity() != k {
        return Err(ApproxError::Arity {
            modulus: delta.arity(),
            target: k,
        });
    }
    if let Some(bad) = u.values.iter().find(|v| !v.in_unit_interval()) {
        return Err(ApproxError::OutOfRange(bad.clone()));
    }
    let g = u.points.len();
    for i in 0..g {
        for j in i + 1..g {
            let lhs = (&u.values[i] - &u.values[j]).abs();
            let diff: Vec<Rational> = u.points[i]
                .iter()
                .zip(&u.points[j])
                .map(|(a, b)| a - b)
                .collect();
            let rhs = delta.value(&pi_fold(&diff));
            if lhs > rhs {
                return Err(ApproxError::NotRespecting {
                    x: u.points[i].clone(),
                    y: u.points[j].clone(),
                    lhs,
                    rhs,
                });
            }
        }
    }

    let mut leaves_used = 0usize;
    let mut h_vals: Vec<Rational> = vec![Rational::zero(); g];
    let mut joins: Vec<LatticeTerm> = Vec::new();
    loop {
        let (x, gap) =
            argmax(u.values.iter().zip(&h_vals).map(|(a, b)| a - b)).expect("nonempty grid");
        if &gap < eps && !joins.is_empty() {
            break;
        }
        let mut k_vals: Vec<Rational> = vec![Rational::one(); g];
        let mut meets: Vec<LatticeTerm> = Vec::new();
        loop {
            let (y, over) =
                argmax(k_vals.iter().zip(&u.values).map(|(a, b)| a - b)).expect("nonempty grid");
            if &over < eps && !meets.is_empty() {
                break;
            }
            if leaves_used == budget {
                let best_deviation = deviation(&h_vals, &u.values);
                return Err(ApproxError::OverBudget {
                    budget,
                    best_deviation,
                });
            }
            let seg = interpolant(
                delta,
                &u.points[x],
                &u.values[x],
                &u.points[y],
                &u.values[y],
            );
            for (kv, p) in k_vals.iter_mut().zip(&u.points) {
                let v = seg.eval(p);
                if v < *kv {
                    *kv = v;
                }
            }
            meets.push(seg.into());
            leaves_used += 1;
        }
        for (hv, kv) in h_vals.iter_mut().zip(&k_vals) {
            if kv > hv {
                *hv = kv.clone();
            }
        }
        joins.push(LatticeTerm::meet_all(meets).expect("nonempty"));
    }
    let term = LatticeTerm::join_all(joins).expect("nonempty");
    let exact: Vec<Rational> = u.points.iter().map(|p| term.eval(p)).collect();
    Ok(Approximation {
        deviation: deviation(&exact, &u.values),
        leaves: leaves_used,
        term,
        step: u.step.clone(),
    })
}

fn deviation(h: &[Rational], u: &[Rational]) -> Rational {
    h.iter()
        .zip(u)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
