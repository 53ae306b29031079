use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::modulus::{pi_fold, ModulusSpec};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("segment endpoints must have {expected} coordinates, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("segment data must lie in [0,1], got {0}")]
    OutOfRange(Rational),
    #[error("segment needs a <= b, got a = {a}, b = {b}")]
    Order { a: Rational, b: Rational },
    #[error("segment too steep: b = {b} > a + span = {a} + {span}")]
    TooSteep {
        a: Rational,
        b: Rational,
        span: Rational,
    },
    #[error("endpoints at modulus distance 0 need a = b, got a = {a}, b = {b}")]
    DegenerateUnequal { a: Rational, b: Rational },
    #[error("segments use different moduli")]
    ModulusMismatch,
    #[error("degenerate segment has no slope")]
    Degenerate,
}

/// `z -> min(1, a + (b - a) / D(y - x) * D(z - x))` where `D(w) = Delta(|w|)`,
/// or the constant `a` when `D(y - x) = 0`.
///
/// Takes the value `a` at `x`, `b` at `y`, and respects `Delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegmentConnective {
    #[serde(skip)]
    delta: ModulusSpec,
    x: Vec<Rational>,
    y: Vec<Rational>,
    a: Rational,
    b: Rational,
    /// `(b - a) / D(y - x)`; `None` in the degenerate case.
    #[serde(skip)]
    slope: Option<Rational>,
}

fn tilde(delta: &ModulusSpec, z: &[Rational], x: &[Rational]) -> Rational {
    let diff: Vec<Rational> = z.iter().zip(x).map(|(p, q)| p - q).collect();
    delta.value(&pi_fold(&diff))
}

impl SegmentConnective {
    /// Accepts `a <= b <= a + Delta(|y - x|)` (or `a = b` when that span is 0).
    pub fn new(
        delta: ModulusSpec,
        x: Vec<Rational>,
        y: Vec<Rational>,
        a: Rational,
        b: Rational,
    ) -> Result<Self, SegmentError> {
        let k = delta.arity();
        for v in [&x, &y] {
            if v.len() != k {
                return Err(SegmentError::Arity {
                    expected: k,
                    found: v.len(),
                });
            }
        }
        if let Some(bad) = x
            .iter()
            .chain(&y)
            .chain([&a, &b])
            .find(|v| !v.in_unit_interval())
        {
            return Err(SegmentError::OutOfRange(bad.clone()));
        }
        if a > b {
            return Err(SegmentError::Order { a, b });
        }
        let span = tilde(&delta, &y, &x);
        let slope = if span.is_positive() {
            if b > &a + &span {
                return Err(SegmentError::TooSteep { a, b, span });
            }
            Some((&b - &a) / span)
        } else {
            if a != b {
                return Err(SegmentError::DegenerateUnequal { a, b });
            }
            None
        };
        Ok(SegmentConnective {
            delta,
            x,
            y,
            a,
            b,
            slope,
        })
    }

    /// The constant segment with value `a`.
    pub fn constant(delta: ModulusSpec, a: Rational) -> Result<Self, SegmentError> {
        let origin = vec![Rational::zero(); delta.arity()];
        SegmentConnective::new(delta, origin.clone(), origin, a.clone(), a)
    }

    pub fn delta(&self) -> &ModulusSpec {
        &self.delta
    }

    pub fn arity(&self) -> usize {
        self.delta.arity()
    }

    pub fn x(&self) -> &[Rational] {
        &self.x
    }

    pub fn y(&self) -> &[Rational] {
        &self.y
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn slope(&self) -> Option<&Rational> {
        self.slope.as_ref()
    }

    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }

    pub fn eval(&self, z: &[Rational]) -> Rational {
        match &self.slope {
            None => self.a.clone(),
            Some(s) => {
                let v = &self.a + &(s * &tilde(&self.delta, z, &self.x));
                v.min(Rational::one())
            }
        }
    }

    /// A modulus this connective respects: `slope * Delta` (zero if constant).
    pub fn own_modulus(&self) -> ModulusSpec {
        match &self.slope {
            None => ModulusSpec::zero(self.arity()),
            Some(s) if s.is_zero() => ModulusSpec::zero(self.arity()),
            Some(s) => ModulusSpec::compose(
                ModulusSpec::linear(vec![s.clone()]).expect("nonnegative slope"),
                vec![self.delta.clone()],
            )
            .expect("unary outer")
            .simplify(),
        }
    }
}

impl fmt::Display for SegmentConnective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn vec(f: &mut fmt::Formatter<'_>, v: &[Rational]) -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        write!(f, "seg[{}; ", self.delta)?;
        vec(f, &self.x)?;
        write!(f, "; ")?;
        vec(f, &self.y)?;
        write!(f, "; {}; {}]", self.a, self.b)
    }
}

/// Upper bound on the uniform distance between two segments over the same
/// modulus:
/// `|a - a'| + s * D(x - x') + M * |s - s'|` with `s`, `s'` the slopes and
/// `M = Delta(1, ..., 1)`, the maximum of the (nondecreasing) modulus on the
/// unit cube.
pub fn segment_norm_bound(
    s: &SegmentConnective,
    t: &SegmentConnective,
) -> Result<Rational, SegmentError> {
    if s.delta != t.delta {
        return Err(SegmentError::ModulusMismatch);
    }
    let (Some(slope_s), Some(slope_t)) = (&s.slope, &t.slope) else {
        return Err(SegmentError::Degenerate);
    };
    let m = s.delta.value(&vec![Rational::one(); s.arity()]);
    let shift = tilde(&s.delta, &s.x, &t.x);
    Ok((&s.a - &t.a).abs() + slope_s * &shift + m * (slope_s - slope_t).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn lin(c: &[i64]) -> ModulusSpec {
        ModulusSpec::linear(c.iter().map(|&x| Rational::from_integer(x)).collect()).unwrap()
    }

    #[test]
    fn diagonal_segment() {
        let s = SegmentConnective::new(
            lin(&[1, 1]),
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(1, 1), rat(1, 1)],
            rat(0, 1),
            rat(1, 1),
        )
        .unwrap();
        assert_eq!(s.eval(&[rat(1, 1), rat(1, 1)]), rat(1, 1));
        assert_eq!(s.eval(&[rat(0, 1), rat(0, 1)]), rat(0, 1));
        // min(1, (z0 + z1) / 2)
        assert_eq!(s.eval(&[rat(1, 5), rat(3, 5)]), rat(2, 5));
    }

    #[test]
    fn degenerate_segment_is_constant() {
        let s = SegmentConnective::new(
            lin(&[1, 0]),
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
            rat(1, 3),
            rat(1, 3),
        )
        .unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.eval(&[rat(1, 1), rat(1, 2)]), rat(1, 3));
        assert_eq!(s.own_modulus(), ModulusSpec::zero(2));
    }

    #[test]
    fn too_steep_rejected() {
        let err = SegmentConnective::new(
            lin(&[1]),
            vec![rat(0, 1)],
            vec![rat(1, 4)],
            rat(1, 2),
            rat(1, 1),
        )
        .unwrap_err();
        assert_eq!(
            err,
            SegmentError::TooSteep {
                a: rat(1, 2),
                b: rat(1, 1),
                span: rat(1, 4)
            }
        );
    }

    #[test]
    fn other_rejections() {
        assert!(matches!(
            SegmentConnective::new(
                lin(&[1]),
                vec![rat(0, 1)],
                vec![rat(1, 1)],
                rat(1, 2),
                rat(1, 4)
            ),
            Err(SegmentError::Order { .. })
        ));
        assert!(matches!(
            SegmentConnective::new(
                lin(&[1]),
                vec![rat(3, 2)],
                vec![rat(1, 1)],
                rat(0, 1),
                rat(0, 1)
            ),
            Err(SegmentError::OutOfRange(_))
        ));
        assert!(matches!(
            SegmentConnective::new(
                lin(&[1]),
                vec![rat(1, 2)],
                vec![rat(1, 2)],
                rat(0, 1),
                rat(1, 2)
            ),
            Err(SegmentError::DegenerateUnequal { .. })
        ));
    }

    #[test]
    fn norm_bound_of_identical_segments_is_zero() {
        let s = SegmentConnective::new(
            lin(&[1]),
            vec![rat(0, 1)],
            vec![rat(1, 1)],
            rat(0, 1),
            rat(1, 2),
        )
        .unwrap();
        assert_eq!(segment_norm_bound(&s, &s).unwrap(), rat(0, 1));
    }
}
