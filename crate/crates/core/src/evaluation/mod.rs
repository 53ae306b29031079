//! Exact interpretation of terms and formulas in finite structures.

use serde::Serialize;
use thiserror::Error;

use crate::modulus::ModulusSpec;
use crate::numeric::{Rational, UnitValue};
use crate::structures::{all_tuples, PreStructure};
use crate::syntax::{canonical_modulus, CanonicalError, Formula, NormalForm, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable v{0} has no value")]
    Unassigned(usize),
    #[error("symbol `{0}` has no interpretation")]
    UnknownSymbol(String),
    #[error("point index {0} not in the structure")]
    NotAPoint(usize),
    #[error("tuple entry {0} is not in the subset")]
    OutsideSubset(usize),
    #[error("empty subset")]
    EmptySubset,
}

type Assignment = Vec<Option<usize>>;

fn assignment(s: &PreStructure, tuple: &[usize]) -> Result<Assignment, EvalError> {
    if let Some(&bad) = tuple.iter().find(|&&p| p >= s.len()) {
        return Err(EvalError::NotAPoint(bad));
    }
    Ok(tuple.iter().map(|&p| Some(p)).collect())
}

fn term(t: &Term, s: &PreStructure, env: &Assignment) -> Result<usize, EvalError> {
    match t {
        Term::Var(i) => env
            .get(*i)
            .copied()
            .flatten()
            .ok_or(EvalError::Unassigned(*i)),
        Term::Const(c) => s
            .constant(c)
            .ok_or_else(|| EvalError::UnknownSymbol(c.clone())),
        Term::Apply(f, args) => {
            let vals = args
                .iter()
                .map(|a| term(a, s, env))
                .collect::<Result<Vec<_>, _>>()?;
            s.function_value(f, &vals)
                .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))
        }
    }
}

fn formula(
    phi: &Formula,
    s: &PreStructure,
    env: &mut Assignment,
    domain: &[usize],
) -> Result<Rational, EvalError> {
    match phi {
        Formula::Dist(a, b) => {
            let (x, y) = (term(a, s, env)?, term(b, s, env)?);
            Ok(s.dist(x, y).clone())
        }
        Formula::Rel(r, args) => {
            let vals = args
                .iter()
                .map(|a| term(a, s, env))
                .collect::<Result<Vec<_>, _>>()?;
            s.relation_value(r, &vals)
                .cloned()
                .ok_or_else(|| EvalError::UnknownSymbol(r.clone()))
        }
        Formula::Conn(c, args) => {
            let vals = args
                .iter()
                .map(|a| formula(a, s, env, domain))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(c.apply(&vals))
        }
        Formula::Sup(i, body) | Formula::Inf(i, body) => {
            if env.len() <= *i {
                env.resize(i + 1, None);
            }
            let saved = env[*i];
            let mut best: Option<Rational> = None;
            for &p in domain {
                env[*i] = Some(p);
                let v = formula(body, s, env, domain)?;
                best = Some(match (best, matches!(phi, Formula::Sup(..))) {
                    (None, _) => v,
                    (Some(b), true) => b.max(v),
                    (Some(b), false) => b.min(v),
                });
            }
            env[*i] = saved;
            best.ok_or(EvalError::EmptySubset)
        }
    }
}

/// The point denoted by `t` when `v_i` is `tuple[i]`.
pub fn eval_term(t: &Term, s: &PreStructure, tuple: &[usize]) -> Result<usize, EvalError> {
    term(t, s, &assignment(s, tuple)?)
}

/// The value of `phi` when `v_i` is `tuple[i]`; quantifiers range over all points.
pub fn eval_formula(
    phi: &Formula,
    s: &PreStructure,
    tuple: &[usize],
) -> Result<UnitValue, EvalError> {
    let v = eval_formula_value(phi, s, tuple)?;
    Ok(UnitValue::new(v).expect("interpretations take values in [0,1]"))
}

/// [`eval_formula`] as a bare rational.
pub fn eval_formula_value(
    phi: &Formula,
    s: &PreStructure,
    tuple: &[usize],
) -> Result<Rational, EvalError> {
    let domain: Vec<usize> = (0..s.len()).collect();
    formula(phi, s, &mut assignment(s, tuple)?, &domain)
}

/// Evaluates a normal form by first evaluating its atomics.
pub fn eval_normal_form(
    nf: &NormalForm,
    s: &PreStructure,
    tuple: &[usize],
) -> Result<Rational, EvalError> {
    let vals = nf
        .atomics
        .iter()
        .map(|a| eval_formula_value(a, s, tuple))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(nf.connective.eval(&vals))
}

/// Values of `phi` with quantifiers restricted to `subset` and over all points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DenseAgreement {
    pub restricted: Rational,
    pub full: Rational,
    /// `max_x min_{y in subset} d(x, y)`.
    pub density: Rational,
}

/// Least `eps` with every point within `eps` of `subset`.
pub fn density_radius(s: &PreStructure, subset: &[usize]) -> Result<Rational, EvalError> {
    if subset.is_empty() {
        return Err(EvalError::EmptySubset);
    }
    if let Some(&bad) = subset.iter().find(|&&p| p >= s.len()) {
        return Err(EvalError::NotAPoint(bad));
    }
    Ok((0..s.len())
        .map(|x| {
            subset
                .iter()
                .map(|&y| s.dist(x, y).clone())
                .min()
                .expect("nonempty")
        })
        .max()
        .expect("structures are nonempty"))
}

pub fn eval_dense_agreement(
    phi: &Formula,
    s: &PreStructure,
    subset: &[usize],
    tuple: &[usize],
) -> Result<DenseAgreement, EvalError> {
    let density = density_radius(s, subset)?;
    if let Some(&bad) = tuple.iter().find(|p| !subset.contains(p)) {
        return Err(EvalError::OutsideSubset(bad));
    }
    let restricted = formula(phi, s, &mut assignment(s, tuple)?, subset)?;
    let full = eval_formula_value(phi, s, tuple)?;
    Ok(DenseAgreement {
        restricted,
        full,
        density,
    })
}

/// Bound on `|restricted - full|` in [`eval_dense_agreement`] for a subset
/// of density radius `eps`.
///
/// Atomics contribute 0, a connective applies its modulus to the bounds of
/// its arguments, and a quantifier over `v_i` adds the body's canonical
/// modulus at `eps` in coordinate `i`.
pub fn dense_agreement_bound(
    phi: &Formula,
    s: &PreStructure,
    arity: usize,
    eps: &Rational,
) -> Result<Rational, CanonicalError> {
    let b = match phi {
        Formula::Dist(..) | Formula::Rel(..) => Rational::zero(),
        Formula::Conn(c, args) => {
            let inner = args
                .iter()
                .map(|a| dense_agreement_bound(a, s, arity, eps))
                .collect::<Result<Vec<_>, _>>()?;
            c.modulus(args.len()).value(&inner)
        }
        Formula::Sup(i, body) | Formula::Inf(i, body) => {
            let wide = arity.max(i + 1);
            let inner = dense_agreement_bound(body, s, wide, eps)?;
            let m: ModulusSpec = canonical_modulus(body, s.signature(), wide)?;
            let mut e = vec![Rational::zero(); wide];
            e[*i] = eps.clone();
            inner + m.value(&e)
        }
    };
    Ok(b.min(Rational::one()))
}

/// A pair of tuples on which `phi` moves more than its canonical modulus allows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModulusWitness {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Exhaustive check, over all pairs of `arity`-tuples, that `phi` respects
/// its canonical modulus in `s`.
pub fn check_canonical_respect(
    phi: &Formula,
    s: &PreStructure,
    arity: usize,
) -> Result<Option<ModulusWitness>, EvalCheckError> {
    let m = canonical_modulus(phi, s.signature(), arity)?;
    let tuples = all_tuples(s.len(), arity);
    let vals = tuples
        .iter()
        .map(|t| eval_formula_value(phi, s, t))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, a) in tuples.iter().enumerate() {
        for (j, b) in tuples.iter().enumerate().skip(i + 1) {
            let lhs = (&vals[i] - &vals[j]).abs();
            let rhs = m.value(&s.tuple_dists(a, b));
            if lhs > rhs {
                return Ok(Some(ModulusWitness {
                    left: a.clone(),
                    right: b.clone(),
                    lhs,
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalCheckError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::structures::parse_structure;
    use crate::syntax::{normalize_basic, parse_formula, parse_term};

    fn three() -> PreStructure {
        parse_structure("mscott/1\n[points]\nx y z\n[metric]\ny: 1/5\nz: 2/5 3/5\n").unwrap()
    }

    #[test]
    fn terms() {
        let s = parse_structure(
            "mscott/1\n[signature]\nfun f/1 : linear(1)\nconst c\n[points]\np q\n[metric]\nq: 1/2\n[fun f]\np -> q\nq -> p\n[const c] q\n",
        )
        .unwrap();
        let sig = s.signature().clone();
        assert_eq!(
            eval_term(&parse_term("v0", &sig).unwrap(), &s, &[0, 1]),
            Ok(0)
        );
        assert_eq!(eval_term(&parse_term("c", &sig).unwrap(), &s, &[]), Ok(1));
        assert_eq!(
            eval_term(&parse_term("f(v1)", &sig).unwrap(), &s, &[0, 1]),
            Ok(0)
        );
        assert_eq!(
            eval_term(&parse_term("v2", &sig).unwrap(), &s, &[0, 1]),
            Err(EvalError::Unassigned(2))
        );
    }

    #[test]
    fn formulas() {
        let s = three();
        let sig = s.signature().clone();
        let d = parse_formula("d(v0, v1)", &sig).unwrap();
        assert_eq!(eval_formula_value(&d, &s, &[0, 1]).unwrap(), rat(1, 5));
        let sup = parse_formula("sup v1 . d(v0, v1)", &sig).unwrap();
        assert_eq!(eval_formula_value(&sup, &s, &[0]).unwrap(), rat(2, 5));
        let inf = parse_formula("inf v1 . d(v0, v1)", &sig).unwrap();
        assert_eq!(eval_formula_value(&inf, &s, &[0]).unwrap(), rat(0, 1));
        // min(1, (d(v0,v1) + d(v1,v2)) / 2) at (x, y, z)
        let avg = parse_formula(
            "seg[linear(1,1); (0,0); (1,1); 0; 1](d(v0, v1), d(v1, v2))",
            &sig,
        )
        .unwrap();
        assert_eq!(eval_formula_value(&avg, &s, &[0, 1, 2]).unwrap(), rat(2, 5));
    }

    #[test]
    fn normal_form_agrees() {
        let s = three();
        let sig = s.signature().clone();
        let f = parse_formula(
            "latmin(pwl((0,0),(1,1/2))(latmax(d(v0,v1), d(v1,v2))), d(v0,v2))",
            &sig,
        )
        .unwrap();
        let nf = normalize_basic(&f).unwrap();
        for t in all_tuples(3, 3) {
            assert_eq!(
                eval_normal_form(&nf, &s, &t).unwrap(),
                eval_formula_value(&f, &s, &t).unwrap()
            );
        }
    }

    #[test]
    fn dense_agreement_basics() {
        let s = three();
        let sig = s.signature().clone();
        let sup = parse_formula("sup v1 . d(v0, v1)", &sig).unwrap();
        let full = eval_dense_agreement(&sup, &s, &[0, 1, 2], &[0]).unwrap();
        assert_eq!(full.restricted, full.full);
        assert_eq!(full.density, rat(0, 1));
        let part = eval_dense_agreement(&sup, &s, &[0, 1], &[0]).unwrap();
        assert_eq!(part.density, rat(2, 5));
        let bound = dense_agreement_bound(&sup, &s, 1, &part.density).unwrap();
        assert!((&part.full - &part.restricted).abs() <= bound);
        assert_eq!(
            eval_dense_agreement(&sup, &s, &[0, 1], &[2]),
            Err(EvalError::OutsideSubset(2))
        );
    }

    #[test]
    fn canonical_respect() {
        let s = three();
        let sig = s.signature().clone();
        for text in [
            "d(v0, v1)",
            "sup v1 . d(v0, v1)",
            "inf v2 . latmax(d(v0, v2), d(v1, v2))",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            assert_eq!(check_canonical_respect(&f, &s, 2).unwrap(), None, "{text}");
        }
    }
}
