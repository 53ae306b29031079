//! Moduli of uniform continuity and weak moduli.
//!
//! A modulus of arity `n` is a nondecreasing, subadditive function
//! `(R>=0)^n -> R>=0` vanishing at the origin. Only finitely presented forms
//! are representable, so every evaluation is exact.

mod envelope;
mod induced;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{grid_points, RatGrid, Rational};

pub use envelope::{largest_modulus_below, Envelope, EnvelopeError, GridFunction};
pub use induced::{
    induced_connective_modulus, induced_modulus_exact, InducedError, InducedModulus, InducedRoute,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModulusError {
    #[error("arity mismatch: modulus has arity {expected}, got {found} arguments")]
    ArityMismatch { expected: usize, found: usize },
    #[error("negative coefficient {0} in linear modulus")]
    NegativeCoefficient(Rational),
    #[error("cap must be positive, got {0}")]
    NonPositiveCap(Rational),
    #[error("piecewise modulus must start at (0,0)")]
    PwlNotAnchored,
    #[error("piecewise breakpoints must have strictly increasing abscissae")]
    PwlNotIncreasing,
    #[error("piecewise modulus must be nondecreasing")]
    PwlDecreasing,
    #[error("piecewise modulus must be concave (slopes nonincreasing)")]
    PwlNotConcave,
    #[error("max-of operands must all be linear or positive rescalings of one modulus")]
    MaxOfNotSubadditive,
    #[error("max-of needs at least one operand")]
    MaxOfEmpty,
    #[error("table has {found} values, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("table step must divide its bound")]
    TableStep,
    #[error("table is not a modulus on its own grid: {0}")]
    TableNotModulus(String),
}

/// A tabulated modulus on the uniform grid `{0, step, ..., bound}^dims`.
///
/// Off-grid arguments are rounded up to the grid coordinatewise and clamped
/// at `bound`; the extension stays nondecreasing and subadditive whenever the
/// table is so on grid pairs (sums clamped to the bound).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableModulus {
    pub step: Rational,
    pub bound: Rational,
    pub values: Vec<Rational>,
    per_axis: usize,
}

impl TableModulus {
    pub fn axis_len(&self) -> usize {
        self.per_axis
    }

    fn index_of(&self, x: &[Rational]) -> usize {
        let mut idx = 0usize;
        for xi in x {
            let clamped = if *xi > self.bound {
                self.bound.clone()
            } else {
                xi.clone()
            };
            let k = if clamped.is_positive() {
                (&clamped / &self.step).ceil().to_i64().unwrap_or(0) as usize
            } else {
                0
            };
            idx = idx * self.per_axis + k.min(self.per_axis - 1);
        }
        idx
    }
}

/// The finitely presented shapes a modulus may take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModulusForm {
    Zero,
    /// `sum c_i x_i`.
    Linear(Vec<Rational>),
    /// `min(cap, sum c_i x_i)`.
    CappedLinear {
        cap: Rational,
        coeffs: Vec<Rational>,
    },
    /// A concave nondecreasing piecewise-linear `p` with `p(0) = 0`, applied
    /// to `sum x_i`; constant past the last breakpoint.
    PiecewiseConcave1D(Vec<(Rational, Rational)>),
    /// Pointwise maximum.
    MaxOf(Vec<ModulusSpec>),
    /// `outer(inner_0(x), ..., inner_{k-1}(x))`.
    Compose {
        outer: Box<ModulusSpec>,
        inner: Vec<ModulusSpec>,
    },
    Table(TableModulus),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusSpec {
    arity: usize,
    form: ModulusForm,
}

impl ModulusSpec {
    pub fn zero(arity: usize) -> Self {
        ModulusSpec {
            arity,
            form: ModulusForm::Zero,
        }
    }

    pub fn linear(coeffs: Vec<Rational>) -> Result<Self, ModulusError> {
        if let Some(c) = coeffs.iter().find(|c| c.is_negative()) {
            return Err(ModulusError::NegativeCoefficient(c.clone()));
        }
        Ok(ModulusSpec {
            arity: coeffs.len(),
            form: ModulusForm::Linear(coeffs),
        })
    }

    /// `x_i` as a modulus of arity `arity`.
    pub fn projection(arity: usize, i: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); arity];
        coeffs[i] = Rational::one();
        ModulusSpec {
            arity,
            form: ModulusForm::Linear(coeffs),
        }
    }

    /// `sum x_i`.
    pub fn sum(arity: usize) -> Self {
        ModulusSpec {
            arity,
            form: ModulusForm::Linear(vec![Rational::one(); arity]),
        }
    }

    pub fn capped(cap: Rational, coeffs: Vec<Rational>) -> Result<Self, ModulusError> {
        if !cap.is_positive() {
            return Err(ModulusError::NonPositiveCap(cap));
        }
        if let Some(c) = coeffs.iter().find(|c| c.is_negative()) {
            return Err(ModulusError::NegativeCoefficient(c.clone()));
        }
        Ok(ModulusSpec {
            arity: coeffs.len(),
            form: ModulusForm::CappedLinear { cap, coeffs },
        })
    }

    pub fn piecewise(
        arity: usize,
        breakpoints: Vec<(Rational, Rational)>,
    ) -> Result<Self, ModulusError> {
        validate_pwl(&breakpoints)?;
        Ok(Self::piecewise_unchecked(arity, breakpoints))
    }

    /// Builds a piecewise form without the concavity and monotonicity checks.
    /// Such a value may fail [`check_modulus`]; it exists so that broken
    /// inputs can be exercised.
    pub fn piecewise_unchecked(arity: usize, breakpoints: Vec<(Rational, Rational)>) -> Self {
        ModulusSpec {
            arity,
            form: ModulusForm::PiecewiseConcave1D(breakpoints),
        }
    }

    pub fn max_of(operands: Vec<ModulusSpec>) -> Result<Self, ModulusError> {
        let first = operands.first().ok_or(ModulusError::MaxOfEmpty)?;
        let arity = first.arity;
        if let Some(bad) = operands.iter().find(|m| m.arity != arity) {
            return Err(ModulusError::ArityMismatch {
                expected: arity,
                found: bad.arity,
            });
        }
        let all_linear = operands
            .iter()
            .all(|m| matches!(m.form, ModulusForm::Linear(_) | ModulusForm::Zero));
        let all_scaled = operands.iter().all(|m| m.scale_factor_of(first).is_some());
        if !(all_linear || all_scaled) {
            return Err(ModulusError::MaxOfNotSubadditive);
        }
        Ok(ModulusSpec {
            arity,
            form: ModulusForm::MaxOf(operands),
        })
    }

    /// Composition `outer(inner_0, ..., inner_{k-1})`. A composition of moduli
    /// is a modulus.
    pub fn compose(outer: ModulusSpec, inner: Vec<ModulusSpec>) -> Result<Self, ModulusError> {
        if inner.len() != outer.arity {
            return Err(ModulusError::ArityMismatch {
                expected: outer.arity,
                found: inner.len(),
            });
        }
        let arity = match inner.first() {
            Some(m) => m.arity,
            None => 0,
        };
        if let Some(bad) = inner.iter().find(|m| m.arity != arity) {
            return Err(ModulusError::ArityMismatch {
                expected: arity,
                found: bad.arity,
            });
        }
        Ok(ModulusSpec {
            arity,
            form: ModulusForm::Compose {
                outer: Box::new(outer),
                inner,
            },
        })
    }

    /// A tabulated modulus; the table is checked exhaustively on its grid.
    pub fn table(
        dims: usize,
        step: Rational,
        bound: Rational,
        values: Vec<Rational>,
    ) -> Result<Self, ModulusError> {
        let spec = Self::table_unchecked(dims, step, bound, values)?;
        let grid = RatGrid::new(dims, spec.table_step().clone(), spec.table_bound().clone());
        let report = check_modulus(&spec, &grid);
        match report.violation {
            None => Ok(spec),
            Some(v) => Err(ModulusError::TableNotModulus(v.to_string())),
        }
    }

    pub(crate) fn table_unchecked(
        dims: usize,
        step: Rational,
        bound: Rational,
        values: Vec<Rational>,
    ) -> Result<Self, ModulusError> {
        let ratio = &bound / &step;
        if !ratio.is_integer() {
            return Err(ModulusError::TableStep);
        }
        let per_axis = ratio.to_i64().unwrap_or(0) as usize + 1;
        let expected = per_axis.pow(dims as u32);
        if values.len() != expected {
            return Err(ModulusError::TableSize {
                expected,
                found: values.len(),
            });
        }
        Ok(ModulusSpec {
            arity: dims,
            form: ModulusForm::Table(TableModulus {
                step,
                bound,
                values,
                per_axis,
            }),
        })
    }

    fn table_step(&self) -> &Rational {
        match &self.form {
            ModulusForm::Table(t) => &t.step,
            _ => unreachable!(),
        }
    }

    fn table_bound(&self) -> &Rational {
        match &self.form {
            ModulusForm::Table(t) => &t.bound,
            _ => unreachable!(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn form(&self) -> &ModulusForm {
        &self.form
    }

    /// Exact value at `x`.
    pub fn eval(&self, x: &[Rational]) -> Result<Rational, ModulusError> {
        if x.len() != self.arity {
            return Err(ModulusError::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        Ok(self.value(x))
    }

    /// Exact value at `x`; panics on arity mismatch.
    pub fn value(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.arity, "modulus arity mismatch");
        match &self.form {
            ModulusForm::Zero => Rational::zero(),
            ModulusForm::Linear(c) => dot(c, x),
            ModulusForm::CappedLinear { cap, coeffs } => dot(coeffs, x).min(cap.clone()),
            ModulusForm::PiecewiseConcave1D(points) => {
                let s: Rational = x.iter().sum();
                eval_pwl(points, &s)
            }
            ModulusForm::MaxOf(ms) => ms
                .iter()
                .map(|m| m.value(x))
                .max()
                .unwrap_or_else(Rational::zero),
            ModulusForm::Compose { outer, inner } => {
                let ys: Vec<Rational> = inner.iter().map(|m| m.value(x)).collect();
                outer.value(&ys)
            }
            ModulusForm::Table(t) => t.values[t.index_of(x)].clone(),
        }
    }

    /// Structural test for the constant-zero function.
    pub fn is_identically_zero(&self) -> bool {
        match &self.form {
            ModulusForm::Zero => true,
            ModulusForm::Linear(c) => c.iter().all(Rational::is_zero),
            ModulusForm::CappedLinear { coeffs, .. } => coeffs.iter().all(Rational::is_zero),
            ModulusForm::PiecewiseConcave1D(p) => p.iter().all(|(_, y)| y.is_zero()),
            ModulusForm::MaxOf(ms) => ms.iter().all(ModulusSpec::is_identically_zero),
            ModulusForm::Compose { outer, inner } => {
                if outer.is_identically_zero() || inner.iter().all(ModulusSpec::is_identically_zero)
                {
                    return true;
                }
                // Linear outer: zero iff every inner with a positive weight is zero.
                if let ModulusForm::Linear(c) = &outer.form {
                    return c
                        .iter()
                        .zip(inner)
                        .all(|(ci, m)| ci.is_zero() || m.is_identically_zero());
                }
                false
            }
            ModulusForm::Table(t) => t.values.iter().all(Rational::is_zero),
        }
    }

    /// `Some(c)` with `self = c * base` exactly (`c > 0`), for the shapes
    /// where rescaling is recognisable.
    fn scale_factor_of(&self, base: &ModulusSpec) -> Option<Rational> {
        fn ratio(a: &[Rational], b: &[Rational]) -> Option<Rational> {
            if a.len() != b.len() {
                return None;
            }
            let mut factor: Option<Rational> = None;
            for (x, y) in a.iter().zip(b) {
                if y.is_zero() {
                    if !x.is_zero() {
                        return None;
                    }
                    continue;
                }
                let r = x / y;
                match &factor {
                    Some(f) if *f != r => return None,
                    None => factor = Some(r),
                    _ => {}
                }
            }
            factor.filter(Rational::is_positive)
        }
        match (&self.form, &base.form) {
            (ModulusForm::Zero, ModulusForm::Zero) => Some(Rational::one()),
            (ModulusForm::Linear(a), ModulusForm::Linear(b)) => ratio(a, b),
            (
                ModulusForm::CappedLinear { cap: ca, coeffs: a },
                ModulusForm::CappedLinear { cap: cb, coeffs: b },
            ) => {
                let f = ratio(a, b)?;
                (ca == &(&f * cb)).then_some(f)
            }
            (ModulusForm::PiecewiseConcave1D(a), ModulusForm::PiecewiseConcave1D(b)) => {
                if a.len() != b.len() || a.iter().zip(b).any(|(p, q)| p.0 != q.0) {
                    return None;
                }
                let ya: Vec<_> = a.iter().map(|p| p.1.clone()).collect();
                let yb: Vec<_> = b.iter().map(|p| p.1.clone()).collect();
                ratio(&ya, &yb)
            }
            _ => None,
        }
    }

    /// Folds compositions of linear pieces into a single linear or max-of-linear form.
    pub fn simplify(self) -> ModulusSpec {
        let arity = self.arity;
        match self.form {
            ModulusForm::Compose { outer, inner } => {
                let outer = outer.simplify();
                let inner: Vec<ModulusSpec> = inner.into_iter().map(|m| m.simplify()).collect();
                let rebuilt = ModulusSpec {
                    arity,
                    form: ModulusForm::Compose {
                        outer: Box::new(outer.clone()),
                        inner: inner.clone(),
                    },
                };
                if rebuilt.is_identically_zero() {
                    return ModulusSpec::zero(arity);
                }
                let inner_lin: Option<Vec<Vec<Rational>>> =
                    inner.iter().map(|m| m.as_linear(arity)).collect();
                let Some(inner_lin) = inner_lin else {
                    return rebuilt;
                };
                let compose_linear = |c: &[Rational]| -> Vec<Rational> {
                    (0..arity)
                        .map(|j| c.iter().zip(&inner_lin).map(|(ci, row)| ci * &row[j]).sum())
                        .collect()
                };
                if let Some(c) = outer.as_linear(outer.arity) {
                    return ModulusSpec::linear(compose_linear(&c))
                        .expect("nonnegative")
                        .simplify();
                }
                if let ModulusForm::MaxOf(ms) = &outer.form {
                    let rows: Option<Vec<Vec<Rational>>> =
                        ms.iter().map(|m| m.as_linear(outer.arity)).collect();
                    if let Some(rows) = rows {
                        let ops = rows
                            .iter()
                            .map(|c| ModulusSpec::linear(compose_linear(c)).expect("nonnegative"))
                            .collect();
                        return ModulusSpec::max_of(ops)
                            .expect("linear operands")
                            .simplify();
                    }
                }
                rebuilt
            }
            ModulusForm::MaxOf(ms) => {
                let ms: Vec<ModulusSpec> = ms.into_iter().map(|m| m.simplify()).collect();
                let lin: Option<Vec<Vec<Rational>>> =
                    ms.iter().map(|m| m.as_linear(arity)).collect();
                match lin {
                    Some(rows) => {
                        let rows = prune_dominated(rows);
                        if rows.is_empty() {
                            ModulusSpec::zero(arity)
                        } else if rows.len() == 1 {
                            ModulusSpec::linear(rows.into_iter().next().unwrap())
                                .expect("nonnegative")
                                .simplify()
                        } else {
                            ModulusSpec {
                                arity,
                                form: ModulusForm::MaxOf(
                                    rows.into_iter()
                                        .map(|r| ModulusSpec::linear(r).expect("nonnegative"))
                                        .collect(),
                                ),
                            }
                        }
                    }
                    None => ModulusSpec {
                        arity,
                        form: ModulusForm::MaxOf(ms),
                    },
                }
            }
            ModulusForm::Linear(c) if c.iter().all(Rational::is_zero) => ModulusSpec::zero(arity),
            form => ModulusSpec { arity, form },
        }
    }

    /// Coefficients when this modulus is linear (zero counts as linear).
    pub fn as_linear(&self, arity: usize) -> Option<Vec<Rational>> {
        match &self.form {
            ModulusForm::Zero => Some(vec![Rational::zero(); arity]),
            ModulusForm::Linear(c) => Some(c.clone()),
            _ => None,
        }
    }

    /// `self` with coordinate `i` pinned to zero (same arity).
    pub fn zero_coordinate(&self, i: usize) -> ModulusSpec {
        let inner = (0..self.arity)
            .map(|j| {
                if j == i {
                    ModulusSpec::zero(self.arity)
                } else {
                    ModulusSpec::projection(self.arity, j)
                }
            })
            .collect();
        ModulusSpec::compose(self.clone(), inner)
            .expect("arity preserved")
            .simplify()
    }

    /// `self` viewed as a modulus of larger arity, ignoring the extra
    /// coordinates.
    pub fn widen(&self, arity: usize) -> ModulusSpec {
        assert!(arity >= self.arity);
        if arity == self.arity {
            return self.clone();
        }
        let inner = (0..self.arity)
            .map(|j| ModulusSpec::projection(arity, j))
            .collect();
        ModulusSpec::compose(self.clone(), inner)
            .expect("arity preserved")
            .simplify()
    }
}

fn prune_dominated(rows: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let mut unique: Vec<Vec<Rational>> = Vec::new();
    for r in rows {
        if !unique.contains(&r) {
            unique.push(r);
        }
    }
    let dominated =
        |a: &Vec<Rational>, b: &Vec<Rational>| a != b && a.iter().zip(b).all(|(x, y)| x <= y);
    let kept: Vec<Vec<Rational>> = unique
        .iter()
        .filter(|a| !unique.iter().any(|b| dominated(a, b)))
        .filter(|a| !a.iter().all(Rational::is_zero))
        .cloned()
        .collect();
    let mut kept = kept;
    kept.sort();
    kept
}

fn dot(c: &[Rational], x: &[Rational]) -> Rational {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn validate_pwl(points: &[(Rational, Rational)]) -> Result<(), ModulusError> {
    match points.first() {
        Some((x, y)) if x.is_zero() && y.is_zero() => {}
        _ => return Err(ModulusError::PwlNotAnchored),
    }
    let mut last_slope: Option<Rational> = None;
    for w in points.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        if x1 <= x0 {
            return Err(ModulusError::PwlNotIncreasing);
        }
        if y1 < y0 {
            return Err(ModulusError::PwlDecreasing);
        }
        let slope = (y1 - y0) / (x1 - x0);
        if let Some(prev) = &last_slope {
            if slope > *prev {
                return Err(ModulusError::PwlNotConcave);
            }
        }
        last_slope = Some(slope);
    }
    Ok(())
}

/// Linear interpolation through `points`, constant outside their span.
pub(crate) fn eval_pwl(points: &[(Rational, Rational)], s: &Rational) -> Rational {
    let Some(first) = points.first() else {
        return Rational::zero();
    };
    if *s <= first.0 {
        return first.1.clone();
    }
    for w in points.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        if s <= x1 {
            return y0 + &((y1 - y0) * (s - x0) / (x1 - x0));
        }
    }
    points.last().unwrap().1.clone()
}

/// Coordinatewise absolute value.
pub fn pi_fold(x: &[Rational]) -> Vec<Rational> {
    x.iter().map(Rational::abs).collect()
}

/// First failure found by [`check_modulus`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusViolation {
    NonzeroAtOrigin {
        value: Rational,
    },
    NotMonotone {
        r: Vec<Rational>,
        s: Vec<Rational>,
        at_r: Rational,
        at_sum: Rational,
    },
    NotSubadditive {
        r: Vec<Rational>,
        s: Vec<Rational>,
        at_sum: Rational,
        bound: Rational,
    },
}

impl fmt::Display for ModulusViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusViolation::NonzeroAtOrigin { value } => write!(f, "value {value} at origin"),
            ModulusViolation::NotMonotone { r, s, at_r, at_sum } => {
                write!(f, "not monotone at r={r:?}, s={s:?}: {at_r} > {at_sum}")
            }
            ModulusViolation::NotSubadditive {
                r,
                s,
                at_sum,
                bound,
            } => write!(f, "not subadditive at r={r:?}, s={s:?}: {at_sum} > {bound}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModulusCheck {
    pub pairs_checked: usize,
    pub violation: Option<ModulusViolation>,
}

impl ModulusCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Exhaustively checks `m(0) = 0` and `m(r) <= m(r+s) <= m(r) + m(s)` over
/// all pairs of points of `g`. Returns the first counterexample found.
pub fn check_modulus(m: &ModulusSpec, g: &RatGrid) -> ModulusCheck {
    assert_eq!(
        g.dimension,
        m.arity(),
        "grid dimension must equal modulus arity"
    );
    let origin = vec![Rational::zero(); m.arity()];
    let at_origin = m.value(&origin);
    if !at_origin.is_zero() {
        return ModulusCheck {
            pairs_checked: 0,
            violation: Some(ModulusViolation::NonzeroAtOrigin { value: at_origin }),
        };
    }
    let points = grid_points(g);
    let values: Vec<Rational> = points.iter().map(|p| m.value(p)).collect();
    let mut pairs = 0;
    for (r, mr) in points.iter().zip(&values) {
        for (s, ms) in points.iter().zip(&values) {
            pairs += 1;
            let sum: Vec<Rational> = r.iter().zip(s).map(|(a, b)| a + b).collect();
            let at_sum = m.value(&sum);
            if *mr > at_sum {
                return ModulusCheck {
                    pairs_checked: pairs,
                    violation: Some(ModulusViolation::NotMonotone {
                        r: r.clone(),
                        s: s.clone(),
                        at_r: mr.clone(),
                        at_sum,
                    }),
                };
            }
            let bound = mr + ms;
            if at_sum > bound {
                return ModulusCheck {
                    pairs_checked: pairs,
                    violation: Some(ModulusViolation::NotSubadditive {
                        r: r.clone(),
                        s: s.clone(),
                        at_sum,
                        bound,
                    }),
                };
            }
        }
    }
    ModulusCheck {
        pairs_checked: pairs,
        violation: None,
    }
}

impl fmt::Display for ModulusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, xs: &[Rational]) -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
        match &self.form {
            ModulusForm::Zero => write!(f, "zero"),
            ModulusForm::Linear(c) => {
                write!(f, "linear(")?;
                list(f, c)?;
                write!(f, ")")
            }
            ModulusForm::CappedLinear { cap, coeffs } => {
                write!(f, "capped({cap}; ")?;
                list(f, coeffs)?;
                write!(f, ")")
            }
            ModulusForm::PiecewiseConcave1D(points) => {
                write!(f, "pwl(")?;
                for (i, (x, y)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({x},{y})")?;
                }
                write!(f, ")")
            }
            ModulusForm::MaxOf(ms) => {
                write!(f, "max(")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
            ModulusForm::Compose { outer, inner } => {
                write!(f, "compose({outer}; ")?;
                for (i, m) in inner.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
            ModulusForm::Table(t) => {
                write!(f, "table({}; {}; ", t.step, t.bound)?;
                list(f, &t.values)?;
                write!(f, ")")
            }
        }
    }
}

impl Serialize for ModulusSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A weak modulus, presented by the rule generating its finite slices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakModulus {
    /// `Omega(x) = sum_i x_i`.
    Sum,
    /// `Omega(x) = sup_i x_i`.
    Max,
}

impl WeakModulus {
    /// The slice `Omega_n(x_0..x_{n-1}) = Omega(x_0, ..., x_{n-1}, 0, 0, ...)`.
    pub fn slice(&self, n: usize) -> ModulusSpec {
        match self {
            WeakModulus::Sum => ModulusSpec::sum(n),
            WeakModulus::Max => match n {
                0 => ModulusSpec::zero(0),
                _ => ModulusSpec::max_of((0..n).map(|i| ModulusSpec::projection(n, i)).collect())
                    .expect("projections are linear")
                    .simplify(),
            },
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        match self {
            WeakModulus::Sum => x.iter().sum(),
            WeakModulus::Max => x.iter().cloned().max().unwrap_or_else(Rational::zero),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeakModulus::Sum => "sum",
            WeakModulus::Max => "max",
        }
    }
}

impl std::str::FromStr for WeakModulus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(WeakModulus::Sum),
            "max" => Ok(WeakModulus::Max),
            other => Err(format!(
                "unknown weak modulus `{other}` (expected sum or max)"
            )),
        }
    }
}

/// `Omega_n(x) == Omega_m(x, 0, ..., 0)` for every point of `g` and every
/// `n <= m <= max_arity`. Returns the first mismatch.
pub fn check_slice_consistency(
    omega: WeakModulus,
    max_arity: usize,
    g: &RatGrid,
) -> Option<(usize, usize, Vec<Rational>)> {
    for n in 0..=max_arity {
        let small = omega.slice(n);
        let grid = RatGrid::new(n, g.step.clone(), g.bound.clone());
        for x in grid_points(&grid) {
            let base = small.value(&x);
            for m in n..=max_arity {
                let mut ext = x.clone();
                ext.resize(m, Rational::zero());
                if omega.slice(m).value(&ext) != base {
                    return Some((n, m, x));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("box has {found} coordinates, domain arity is {expected}")]
    Arity { expected: usize, found: usize },
    #[error("negative box corner coordinate {0}")]
    Negative(Rational),
    #[error("no box contains a neighbourhood of the origin")]
    NoNeighbourhood,
}

/// A downward-closed subset of the nonnegative orthant, presented as a finite
/// union of boxes `[0, c_0] x ... x [0, c_{n-1}]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NiceDomain {
    arity: usize,
    corners: Vec<Vec<Rational>>,
}

impl NiceDomain {
    pub fn new(arity: usize, corners: Vec<Vec<Rational>>) -> Result<Self, DomainError> {
        for c in &corners {
            if c.len() != arity {
                return Err(DomainError::Arity {
                    expected: arity,
                    found: c.len(),
                });
            }
            if let Some(x) = c.iter().find(|x| x.is_negative()) {
                return Err(DomainError::Negative(x.clone()));
            }
        }
        // A box with all sides positive contains [0, delta)^n for delta = its shortest side.
        if !corners.iter().any(|c| c.iter().all(Rational::is_positive)) {
            return Err(DomainError::NoNeighbourhood);
        }
        Ok(NiceDomain { arity, corners })
    }

    /// The whole box `[0, bound]^arity`.
    pub fn full(arity: usize, bound: Rational) -> Self {
        NiceDomain::new(arity, vec![vec![bound; arity]]).expect("positive bound")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        !x.iter().any(Rational::is_negative)
            && self
                .corners
                .iter()
                .any(|c| x.iter().zip(c).all(|(a, b)| a <= b))
    }
}
