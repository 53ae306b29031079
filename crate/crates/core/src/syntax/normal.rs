use std::fmt;

use thiserror::Error;

use super::{Connective, Formula};
use crate::modulus::ModulusSpec;
use crate::numeric::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("formula contains a quantifier: {0}")]
pub struct NotBasic(pub String);

/// A connective built by composing primitive connectives over argument slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConnExpr {
    Arg(usize),
    Apply(Connective, Vec<ConnExpr>),
}

impl ConnExpr {
    pub fn eval(&self, z: &[Rational]) -> Rational {
        match self {
            ConnExpr::Arg(i) => z[i.to_owned()].clone(),
            ConnExpr::Apply(c, args) => {
                let vals: Vec<Rational> = args.iter().map(|a| a.eval(z)).collect();
                c.apply(&vals)
            }
        }
    }

    /// A modulus on `[0,1]^k` respected by this expression, built from the
    /// moduli of its primitive connectives.
    pub fn modulus(&self, k: usize) -> ModulusSpec {
        match self {
            ConnExpr::Arg(i) => ModulusSpec::projection(k, *i),
            ConnExpr::Apply(Connective::Const(_), _) => ModulusSpec::zero(k),
            ConnExpr::Apply(c, args) => {
                let inner: Vec<ModulusSpec> = args.iter().map(|a| a.modulus(k)).collect();
                ModulusSpec::compose(c.modulus(args.len()), inner)
                    .expect("arities agree")
                    .simplify()
            }
        }
    }

    /// Substitutes formulas for argument slots.
    pub fn instantiate(&self, atomics: &[Formula]) -> Formula {
        match self {
            ConnExpr::Arg(i) => atomics[*i].clone(),
            ConnExpr::Apply(c, args) => Formula::Conn(
                c.clone(),
                args.iter().map(|a| a.instantiate(atomics)).collect(),
            ),
        }
    }
}

impl fmt::Display for ConnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnExpr::Arg(i) => write!(f, "#{i}"),
            ConnExpr::Apply(c, args) => {
                let shown = Formula::Conn(c.clone(), Vec::new()).to_string();
                let head = shown.strip_suffix("()").unwrap_or(&shown);
                write!(f, "{head}")?;
                if matches!(c, Connective::Const(_)) {
                    return Ok(());
                }
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// `u(phi_0, ..., phi_{k-1})` with atomic, pairwise distinct `phi_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub connective: ConnExpr,
    pub atomics: Vec<Formula>,
}

impl NormalForm {
    pub fn to_formula(&self) -> Formula {
        self.connective.instantiate(&self.atomics)
    }
}

/// Flattens a quantifier-free formula into one composite connective applied
/// to its distinct atomic subformulas, in order of first occurrence.
pub fn normalize_basic(phi: &Formula) -> Result<NormalForm, NotBasic> {
    fn go(phi: &Formula, atomics: &mut Vec<Formula>) -> Result<ConnExpr, NotBasic> {
        match phi {
            Formula::Dist(..) | Formula::Rel(..) => {
                let i = match atomics.iter().position(|a| a == phi) {
                    Some(i) => i,
                    None => {
                        atomics.push(phi.clone());
                        atomics.len() - 1
                    }
                };
                Ok(ConnExpr::Arg(i))
            }
            Formula::Conn(c, args) => {
                let inner = args
                    .iter()
                    .map(|a| go(a, atomics))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ConnExpr::Apply(c.clone(), inner))
            }
            Formula::Sup(..) | Formula::Inf(..) => Err(NotBasic(phi.to_string())),
        }
    }
    let mut atomics = Vec::new();
    let connective = go(phi, &mut atomics)?;
    Ok(NormalForm {
        connective,
        atomics,
    })
}
