//! Largest modulus below a sampled function.
//!
//! The envelope is the infimum of `f(x_0) + ... + f(x_{k-1})` over finite
//! decompositions `x <= x_0 + ... + x_{k-1}` with pieces in the domain. On a
//! grid with at most `k_max` pieces this is an upper bound on the true
//! envelope which decreases as `k_max` grows or the grid is refined.

use serde::Serialize;
use thiserror::Error;

use super::{ModulusSpec, NiceDomain};
use crate::numeric::{grid_points, RatGrid, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("grid step must divide the grid bound")]
    NonUniformGrid,
    #[error("function value at the origin is {0}, expected 0")]
    NonzeroAtOrigin(Rational),
    #[error("function decreases between {lo:?} and {hi:?}")]
    Decreasing {
        lo: Vec<Rational>,
        hi: Vec<Rational>,
    },
    #[error("negative function value {value} at {at:?}")]
    Negative { at: Vec<Rational>, value: Rational },
    #[error("domain is not downward closed on the grid at {0:?}")]
    NotDownwardClosed(Vec<Rational>),
    #[error("domain contains no grid point off the origin along every axis")]
    NoNeighbourhood,
    #[error("domain arity {domain} differs from grid dimension {grid}")]
    Arity { domain: usize, grid: usize },
    #[error("k_max must be at least 1")]
    ZeroPieces,
}

/// A function sampled on a uniform grid; `None` marks points outside its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFunction {
    pub grid: RatGrid,
    pub values: Vec<Option<Rational>>,
}

impl GridFunction {
    pub fn sample<F>(grid: &RatGrid, domain: &NiceDomain, f: F) -> Result<Self, EnvelopeError>
    where
        F: Fn(&[Rational]) -> Rational,
    {
        if domain.arity() != grid.dimension {
            return Err(EnvelopeError::Arity {
                domain: domain.arity(),
                grid: grid.dimension,
            });
        }
        let values = grid_points(grid)
            .iter()
            .map(|p| domain.contains(p).then(|| f(p)))
            .collect();
        Ok(GridFunction {
            grid: grid.clone(),
            values,
        })
    }

    pub fn value_at(&self, index: usize) -> Option<&Rational> {
        self.values[index].as_ref()
    }
}

/// Output of [`largest_modulus_below`].
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub modulus: ModulusSpec,
    /// Envelope values at every grid point, in lexicographic grid order.
    pub values: Vec<Rational>,
    pub k_max: usize,
    pub step: Rational,
    pub bound: Rational,
    /// Whether the min-plus closure changed the `k_max`-truncated table.
    pub closure_tightened: bool,
}

impl Envelope {
    pub fn value_at(&self, point: &[Rational]) -> Rational {
        self.modulus.value(point)
    }
}

struct Layout {
    per_axis: usize,
    dims: usize,
}

impl Layout {
    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims];
        for d in (0..self.dims).rev() {
            out[d] = idx % self.per_axis;
            idx /= self.per_axis;
        }
        out
    }

    fn encode(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.per_axis + c)
    }
}

/// Computes the grid envelope of `f` with at most `k_max` pieces, then closes
/// it under pairwise sums so the result is a modulus on the grid.
///
/// The closure only ever lowers values towards the unbounded-piece envelope,
/// so the result remains an upper bound on the true envelope at grid points.
pub fn largest_modulus_below(f: &GridFunction, k_max: usize) -> Result<Envelope, EnvelopeError> {
    if k_max == 0 {
        return Err(EnvelopeError::ZeroPieces);
    }
    let grid = &f.grid;
    let ratio = &grid.bound / &grid.step;
    if !ratio.is_integer() {
        return Err(EnvelopeError::NonUniformGrid);
    }
    let layout = Layout {
        per_axis: ratio.to_i64().unwrap_or(0) as usize + 1,
        dims: grid.dimension,
    };
    let points = grid_points(grid);
    let n = points.len();
    let coords: Vec<Vec<usize>> = (0..n).map(|i| layout.decode(i)).collect();

    validate_input(f, &points, &coords, &layout)?;

    // best[x]: cheapest cover of x with the pieces used so far.
    let domain: Vec<(usize, Rational)> = f
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.clone().map(|v| (i, v)))
        .collect();
    let mut best: Vec<Option<Rational>> = vec![None; n];
    best[0] = Some(Rational::zero());
    for _ in 0..k_max {
        let mut next = best.clone();
        for x in 0..n {
            for (p, fp) in &domain {
                let rest: Vec<usize> = coords[x]
                    .iter()
                    .zip(&coords[*p])
                    .map(|(a, b)| a.saturating_sub(*b))
                    .collect();
                if let Some(tail) = &best[layout.encode(&rest)] {
                    let cand = fp + tail;
                    if next[x].as_ref().map_or(true, |cur| cand < *cur) {
                        next[x] = Some(cand);
                    }
                }
            }
        }
        if next == best {
            break;
        }
        best = next;
    }
    // Min-plus closure: g(z) <= g(x) + g(y) whenever z <= clamp(x + y).
    // Points no `k_max`-piece cover reaches start at infinity (`None`).
    let truncated = best.clone();
    let mut values = best;
    loop {
        let mut changed = false;
        for x in 0..n {
            let Some(vx) = values[x].clone() else {
                continue;
            };
            for y in x..n {
                let Some(vy) = &values[y] else { continue };
                let sum: Vec<usize> = coords[x]
                    .iter()
                    .zip(&coords[y])
                    .map(|(a, b)| (a + b).min(layout.per_axis - 1))
                    .collect();
                let cand = &vx + vy;
                // Points below the clamped sum pick this up through the
                // monotone pass.
                let z = layout.encode(&sum);
                if values[z].as_ref().map_or(true, |cur| cand < *cur) {
                    values[z] = Some(cand);
                    changed = true;
                }
            }
        }
        // g(z) = min over z' >= z.
        for z in (0..n).rev() {
            for d in 0..layout.dims {
                if coords[z][d] + 1 < layout.per_axis {
                    let mut up = coords[z].clone();
                    up[d] += 1;
                    let u = layout.encode(&up);
                    if let Some(vu) = values[u].clone() {
                        if values[z].as_ref().map_or(true, |cur| vu < *cur) {
                            values[z] = Some(vu);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let closure_tightened = values != truncated;
    let values: Vec<Rational> = values
        .into_iter()
        .map(|v| v.expect("sums of axis steps reach every grid point"))
        .collect();

    let modulus = as_linear_if_exact(&points, &values, grid).unwrap_or_else(|| {
        ModulusSpec::table_unchecked(
            grid.dimension,
            grid.step.clone(),
            grid.bound.clone(),
            values.clone(),
        )
        .expect("uniform grid")
    });
    Ok(Envelope {
        modulus,
        values,
        k_max,
        step: grid.step.clone(),
        bound: grid.bound.clone(),
        closure_tightened,
    })
}

fn validate_input(
    f: &GridFunction,
    points: &[Vec<Rational>],
    coords: &[Vec<usize>],
    layout: &Layout,
) -> Result<(), EnvelopeError> {
    match &f.values[0] {
        Some(v) if v.is_zero() => {}
        Some(v) => return Err(EnvelopeError::NonzeroAtOrigin(v.clone())),
        None => return Err(EnvelopeError::NoNeighbourhood),
    }
    // Unit steps along each axis must be in the domain.
    for d in 0..layout.dims {
        let mut c = vec![0; layout.dims];
        c[d] = 1.min(layout.per_axis - 1);
        if f.values[layout.encode(&c)].is_none() {
            return Err(EnvelopeError::NoNeighbourhood);
        }
    }
    for (i, v) in f.values.iter().enumerate() {
        for d in 0..layout.dims {
            if coords[i][d] == 0 {
                continue;
            }
            let mut down = coords[i].clone();
            down[d] -= 1;
            let j = layout.encode(&down);
            match (v, &f.values[j]) {
                (Some(_), None) => {
                    return Err(EnvelopeError::NotDownwardClosed(points[i].clone()));
                }
                (Some(hi), Some(lo)) if lo > hi => {
                    return Err(EnvelopeError::Decreasing {
                        lo: points[j].clone(),
                        hi: points[i].clone(),
                    });
                }
                _ => {}
            }
        }
        if let Some(v) = v {
            if v.is_negative() {
                return Err(EnvelopeError::Negative {
                    at: points[i].clone(),
                    value: v.clone(),
                });
            }
        }
    }
    Ok(())
}

/// A linear form agreeing with the table at every grid point, if one exists.
fn as_linear_if_exact(
    points: &[Vec<Rational>],
    values: &[Rational],
    grid: &RatGrid,
) -> Option<ModulusSpec> {
    let dims = grid.dimension;
    let coeffs: Vec<Rational> = (0..dims)
        .map(|d| {
            let mut p = vec![Rational::zero(); dims];
            p[d] = grid.step.clone();
            let idx = points
                .iter()
                .position(|q| *q == p)
                .expect("unit step on grid");
            &values[idx] / &grid.step
        })
        .collect();
    let m = ModulusSpec::linear(coeffs).ok()?;
    points
        .iter()
        .zip(values)
        .all(|(p, v)| m.value(p) == *v)
        .then(|| m.simplify())
}
