use std::fmt;

use thiserror::Error;

use super::segment::SegmentConnective;
use crate::modulus::ModulusSpec;
use crate::numeric::{Rational, UnitValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice operands use different moduli")]
    ModulusMismatch,
    #[error("lattice term has arity {expected}, point has {found} coordinates")]
    Arity { expected: usize, found: usize },
    #[error("empty meet or join")]
    Empty,
}

/// A finite meet/join combination of segment functions sharing one modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeTerm {
    Leaf(SegmentConnective),
    Meet(Box<LatticeTerm>, Box<LatticeTerm>),
    Join(Box<LatticeTerm>, Box<LatticeTerm>),
}

impl From<SegmentConnective> for LatticeTerm {
    fn from(s: SegmentConnective) -> Self {
        LatticeTerm::Leaf(s)
    }
}

impl LatticeTerm {
    pub fn meet(a: LatticeTerm, b: LatticeTerm) -> Result<Self, LatticeError> {
        if a.delta() != b.delta() {
            return Err(LatticeError::ModulusMismatch);
        }
        Ok(LatticeTerm::Meet(Box::new(a), Box::new(b)))
    }

    pub fn join(a: LatticeTerm, b: LatticeTerm) -> Result<Self, LatticeError> {
        if a.delta() != b.delta() {
            return Err(LatticeError::ModulusMismatch);
        }
        Ok(LatticeTerm::Join(Box::new(a), Box::new(b)))
    }

    /// Balanced meet of all terms.
    pub fn meet_all(terms: Vec<LatticeTerm>) -> Result<Self, LatticeError> {
        Self::fold_balanced(terms, Self::meet)
    }

    /// Balanced join of all terms.
    pub fn join_all(terms: Vec<LatticeTerm>) -> Result<Self, LatticeError> {
        Self::fold_balanced(terms, Self::join)
    }

    fn fold_balanced(
        mut terms: Vec<LatticeTerm>,
        op: fn(LatticeTerm, LatticeTerm) -> Result<LatticeTerm, LatticeError>,
    ) -> Result<Self, LatticeError> {
        if terms.is_empty() {
            return Err(LatticeError::Empty);
        }
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(op(a, b)?),
                    None => next.push(a),
                }
            }
            terms = next;
        }
        Ok(terms.pop().expect("nonempty"))
    }

    pub fn delta(&self) -> &ModulusSpec {
        match self {
            LatticeTerm::Leaf(s) => s.delta(),
            LatticeTerm::Meet(a, _) | LatticeTerm::Join(a, _) => a.delta(),
        }
    }

    pub fn arity(&self) -> usize {
        self.delta().arity()
    }

    /// Unchecked evaluation; `z` must have `arity()` coordinates.
    pub fn eval(&self, z: &[Rational]) -> Rational {
        match self {
            LatticeTerm::Leaf(s) => s.eval(z),
            LatticeTerm::Meet(a, b) => a.eval(z).min(b.eval(z)),
            LatticeTerm::Join(a, b) => a.eval(z).max(b.eval(z)),
        }
    }

    pub fn leaves(&self) -> Vec<&SegmentConnective> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SegmentConnective>) {
        match self {
            LatticeTerm::Leaf(s) => out.push(s),
            LatticeTerm::Meet(a, b) | LatticeTerm::Join(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            LatticeTerm::Leaf(_) => 1,
            LatticeTerm::Meet(a, b) | LatticeTerm::Join(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// `(max slope) * Delta`, respected by every meet and join of the leaves.
    pub fn own_modulus(&self) -> ModulusSpec {
        let slope = self
            .leaves()
            .into_iter()
            .filter_map(|s| s.slope().cloned())
            .max()
            .unwrap_or_else(Rational::zero);
        if slope.is_zero() {
            return ModulusSpec::zero(self.arity());
        }
        ModulusSpec::compose(
            ModulusSpec::linear(vec![slope]).expect("nonnegative"),
            vec![self.delta().clone()],
        )
        .expect("unary outer")
        .simplify()
    }
}

impl fmt::Display for LatticeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeTerm::Leaf(s) => write!(f, "{s}"),
            LatticeTerm::Meet(a, b) => write!(f, "meet({a}, {b})"),
            LatticeTerm::Join(a, b) => write!(f, "join({a}, {b})"),
        }
    }
}

/// Checked evaluation of a lattice term at a point of `[0,1]^k`.
pub fn lattice_eval(t: &LatticeTerm, z: &[Rational]) -> Result<UnitValue, LatticeError> {
    if z.len() != t.arity() {
        return Err(LatticeError::Arity {
            expected: t.arity(),
            found: z.len(),
        });
    }
    Ok(UnitValue::new(t.eval(z)).expect("segments take values in [0,1]"))
}
