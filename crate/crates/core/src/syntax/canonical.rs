use serde::Serialize;
use thiserror::Error;

use super::{normalize_basic, Formula, NotBasic, Signature, Term};
use crate::modulus::{pi_fold, InducedError, InducedModulus, ModulusSpec, WeakModulus};
use crate::numeric::{grid_points, rat, RatGrid, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("variable v{var} outside arity {arity}")]
    VariableOutOfRange { var: usize, arity: usize },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error(transparent)]
    NotBasic(#[from] NotBasic),
    #[error(transparent)]
    Induced(#[from] InducedError),
}

fn compose(outer: ModulusSpec, inner: Vec<ModulusSpec>, arity: usize) -> ModulusSpec {
    if inner.is_empty() || outer.is_identically_zero() {
        return ModulusSpec::zero(arity);
    }
    ModulusSpec::compose(outer, inner)
        .expect("symbol arity checked at parse time")
        .simplify()
}

/// Restricts a modulus on `arity_of(m)` coordinates to the first `n`; the
/// dropped coordinates must not matter.
fn narrow(m: ModulusSpec, n: usize) -> ModulusSpec {
    if m.arity() == n {
        return m;
    }
    let inner = (0..m.arity())
        .map(|j| {
            if j < n {
                ModulusSpec::projection(n, j)
            } else {
                ModulusSpec::zero(n)
            }
        })
        .collect();
    compose(m, inner, n)
}

/// Modulus of the map `a -> t(a)` on `arity`-tuples.
pub fn canonical_term_modulus(
    t: &Term,
    sig: &Signature,
    arity: usize,
) -> Result<ModulusSpec, CanonicalError> {
    match t {
        Term::Var(i) if *i < arity => Ok(ModulusSpec::projection(arity, *i)),
        Term::Var(i) => Err(CanonicalError::VariableOutOfRange { var: *i, arity }),
        Term::Const(_) => Ok(ModulusSpec::zero(arity)),
        Term::Apply(name, args) => {
            let f = sig
                .function(name)
                .ok_or_else(|| CanonicalError::UnknownSymbol(name.clone()))?;
            let inner = args
                .iter()
                .map(|a| canonical_term_modulus(a, sig, arity))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(compose(f.modulus.clone(), inner, arity))
        }
    }
}

/// The canonical modulus of `phi` over the coordinates `v0..v(arity-1)`.
///
/// Variables map to projections, symbols compose their declared modulus with
/// the argument moduli, connectives compose their own modulus, and a
/// quantifier over `v_i` zeroes coordinate `i`. A distance between
/// syntactically equal terms gets the zero modulus.
pub fn canonical_modulus(
    phi: &Formula,
    sig: &Signature,
    arity: usize,
) -> Result<ModulusSpec, CanonicalError> {
    let terms = |ts: &[Term]| {
        ts.iter()
            .map(|t| canonical_term_modulus(t, sig, arity))
            .collect::<Result<Vec<_>, _>>()
    };
    match phi {
        Formula::Dist(a, b) if a == b => {
            terms(std::slice::from_ref(a))?;
            Ok(ModulusSpec::zero(arity))
        }
        Formula::Dist(a, b) => Ok(compose(
            Signature::distance_modulus(),
            terms(&[a.clone(), b.clone()])?,
            arity,
        )),
        Formula::Rel(name, args) => {
            let r = sig
                .relation(name)
                .ok_or_else(|| CanonicalError::UnknownSymbol(name.clone()))?;
            Ok(compose(r.modulus.clone(), terms(args)?, arity))
        }
        Formula::Conn(c, args) => {
            let inner = args
                .iter()
                .map(|a| canonical_modulus(a, sig, arity))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(compose(c.modulus(args.len()), inner, arity))
        }
        Formula::Sup(i, body) | Formula::Inf(i, body) => {
            let wide = arity.max(i + 1);
            let m = canonical_modulus(body, sig, wide)?.zero_coordinate(*i);
            Ok(narrow(m, arity))
        }
    }
}

/// Resolution of [`respects_weak_modulus`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RespectCheck {
    pub omega: WeakModulus,
    /// Grid step for the connective's arguments.
    pub grid_step: Rational,
    /// Largest number of grid points per check; coarser steps are used for
    /// many arguments.
    pub max_points: usize,
    /// Parameters of the grid route for the induced modulus.
    pub x_step: Rational,
    pub r_step: Rational,
    pub k_max: usize,
}

impl RespectCheck {
    pub fn new(omega: WeakModulus) -> Self {
        RespectCheck {
            omega,
            grid_step: rat(1, 16),
            max_points: 1024,
            x_step: rat(1, 8),
            r_step: rat(1, 8),
            k_max: 8,
        }
    }

    /// The step actually used for `k` varying arguments.
    pub fn effective_step(&self, k: usize) -> Rational {
        let mut m = (&Rational::one() / &self.grid_step)
            .floor()
            .to_i64()
            .unwrap_or(1)
            .max(1);
        while m > 1 && (m as usize + 1).saturating_pow(k as u32) > self.max_points {
            m /= 2;
        }
        rat(1, m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RespectOutcome {
    Respects {
        induced: ModulusSpec,
        exact: bool,
        step: Rational,
        pairs_checked: usize,
    },
    Violates {
        induced: ModulusSpec,
        exact: bool,
        step: Rational,
        /// Values of the non-degenerate atomics at the two points.
        z: Vec<Rational>,
        z_prime: Vec<Rational>,
        /// Values held fixed for the zero-modulus atomics.
        fixed: Vec<Rational>,
        lhs: Rational,
        rhs: Rational,
    },
}

impl RespectOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, RespectOutcome::Respects { .. })
    }
}

/// Grid decision of whether the connective of a basic formula respects the
/// modulus induced by `omega` and the canonical moduli of its atomics.
///
/// Atomics with zero canonical modulus are constant along each structure:
/// `d(t,t)` is fixed at 0 and the others range over the grid.
pub fn respects_weak_modulus(
    phi: &Formula,
    sig: &Signature,
    arity: usize,
    check: &RespectCheck,
) -> Result<RespectOutcome, CanonicalError> {
    let nf = normalize_basic(phi)?;
    let mut moving = Vec::new();
    let mut free_const = Vec::new();
    let mut slot = Vec::with_capacity(nf.atomics.len());
    let mut moduli = Vec::new();
    for a in &nf.atomics {
        let m = canonical_modulus(a, sig, arity)?;
        if !m.is_identically_zero() {
            slot.push(Slot::Moving(moving.len()));
            moving.push(a);
            moduli.push(m);
        } else if matches!(a, Formula::Dist(x, y) if x == y) {
            slot.push(Slot::Zero);
        } else {
            slot.push(Slot::Free(free_const.len()));
            free_const.push(a);
        }
    }
    let k = moving.len();
    let (induced, exact) = if k == 0 {
        (ModulusSpec::zero(0), true)
    } else {
        let im = InducedModulus::compute(
            &moduli,
            check.omega,
            &check.x_step,
            &check.r_step,
            check.k_max,
        )?;
        let exact = matches!(im.route, crate::modulus::InducedRoute::Exact);
        (im.modulus, exact)
    };
    let step = check.effective_step(k);
    let points = grid_points(&RatGrid::unit(k, step.clone()));
    let fixed_step = check.effective_step(free_const.len());
    let fixed_points = grid_points(&RatGrid::unit(free_const.len(), fixed_step));
    let mut pairs_checked = 0usize;
    for fixed in &fixed_points {
        let values: Vec<Rational> = points
            .iter()
            .map(|z| {
                let args: Vec<Rational> = slot
                    .iter()
                    .map(|s| match s {
                        Slot::Moving(i) => z[*i].clone(),
                        Slot::Zero => Rational::zero(),
                        Slot::Free(i) => fixed[*i].clone(),
                    })
                    .collect();
                nf.connective.eval(&args)
            })
            .collect();
        for (i, z) in points.iter().enumerate() {
            for (j, w) in points.iter().enumerate().skip(i + 1) {
                pairs_checked += 1;
                let lhs = (&values[i] - &values[j]).abs();
                let diff: Vec<Rational> = z.iter().zip(w).map(|(a, b)| a - b).collect();
                let rhs = induced.value(&pi_fold(&diff));
                if lhs > rhs {
                    return Ok(RespectOutcome::Violates {
                        induced,
                        exact,
                        step,
                        z: z.clone(),
                        z_prime: w.clone(),
                        fixed: fixed.clone(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(RespectOutcome::Respects {
        induced,
        exact,
        step,
        pairs_checked,
    })
}

enum Slot {
    Moving(usize),
    Zero,
    Free(usize),
}
