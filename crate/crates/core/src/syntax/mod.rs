//! Signatures, terms, formulas and their textual form.

mod canonical;
mod normal;
pub(crate) mod parse;
mod print;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::dense::LatticeTerm;
use crate::modulus::{eval_pwl, ModulusSpec};
use crate::numeric::Rational;

pub use canonical::{
    canonical_modulus, canonical_term_modulus, respects_weak_modulus, CanonicalError, RespectCheck,
    RespectOutcome,
};
pub use normal::{normalize_basic, ConnExpr, NormalForm, NotBasic};
pub use parse::{
    parse_formula, parse_formula_file, parse_modulus, parse_signature, parse_signature_line,
    parse_term, SignatureLine, SyntaxError, SyntaxErrorKind,
};

/// Reserved words that may not name symbols.
pub const RESERVED: &[&str] = &[
    "d", "sup", "inf", "const", "latmin", "latmax", "pwl", "seg", "lat", "meet", "join",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub modulus: ModulusSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("`{0}` is reserved or looks like a variable")]
    ReservedName(String),
    #[error("modulus of `{name}` has arity {found}, symbol has arity {expected}")]
    ModulusArity {
        name: String,
        expected: usize,
        found: usize,
    },
}

/// A signature. The metric symbol `d` is implicit, binary, with modulus
/// `linear(1,1)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Signature {
    relations: Vec<Symbol>,
    functions: Vec<Symbol>,
    constants: Vec<String>,
}

pub(crate) fn is_variable_name(s: &str) -> Option<usize> {
    let digits = s.strip_prefix('v')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl Signature {
    pub fn empty() -> Self {
        Signature::default()
    }

    fn check_fresh(&self, name: &str) -> Result<(), SignatureError> {
        if RESERVED.contains(&name) || is_variable_name(name).is_some() {
            return Err(SignatureError::ReservedName(name.to_string()));
        }
        if self.relation(name).is_some() || self.function(name).is_some() || self.is_constant(name)
        {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    fn symbol(name: &str, arity: usize, modulus: ModulusSpec) -> Result<Symbol, SignatureError> {
        if modulus.arity() != arity {
            return Err(SignatureError::ModulusArity {
                name: name.to_string(),
                expected: arity,
                found: modulus.arity(),
            });
        }
        Ok(Symbol {
            name: name.to_string(),
            arity,
            modulus,
        })
    }

    pub fn add_relation(
        &mut self,
        name: &str,
        arity: usize,
        modulus: ModulusSpec,
    ) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.relations.push(Self::symbol(name, arity, modulus)?);
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: &str,
        arity: usize,
        modulus: ModulusSpec,
    ) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.functions.push(Self::symbol(name, arity, modulus)?);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation(&self, name: &str) -> Option<&Symbol> {
        self.relations.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Symbol> {
        self.functions.iter().find(|s| s.name == name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn distance_modulus() -> ModulusSpec {
        ModulusSpec::sum(2)
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty() && self.functions.is_empty() && self.constants.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    Const(String),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::Const(_) => {}
            Term::Apply(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Apply(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConnectiveError {
    #[error("connective value {0} outside [0,1]")]
    OutOfRange(Rational),
    #[error("piecewise-linear connective needs breakpoints from 0 to 1 with increasing abscissae")]
    BadBreakpoints,
    #[error("connective expects {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
}

/// Connectives with exact evaluation and a known modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Connective {
    /// Nullary constant in `[0,1]`.
    Const(Rational),
    /// Pointwise minimum of one or more arguments.
    LatMin,
    /// Pointwise maximum of one or more arguments.
    LatMax,
    /// A lattice term over segment functions; arity is that of the term.
    Lattice(LatticeTerm),
    /// Unary piecewise-linear map given by breakpoints `(0, y0), ..., (1, ym)`.
    Pwl(Vec<(Rational, Rational)>),
}

impl Connective {
    pub fn constant(q: Rational) -> Result<Self, ConnectiveError> {
        if !q.in_unit_interval() {
            return Err(ConnectiveError::OutOfRange(q));
        }
        Ok(Connective::Const(q))
    }

    pub fn pwl(points: Vec<(Rational, Rational)>) -> Result<Self, ConnectiveError> {
        let anchored = points.len() >= 2
            && points[0].0.is_zero()
            && points[points.len() - 1].0 == Rational::one();
        let increasing = points.windows(2).all(|w| w[0].0 < w[1].0);
        if !anchored || !increasing {
            return Err(ConnectiveError::BadBreakpoints);
        }
        if let Some((_, y)) = points.iter().find(|(_, y)| !y.in_unit_interval()) {
            return Err(ConnectiveError::OutOfRange(y.clone()));
        }
        Ok(Connective::Pwl(points))
    }

    /// Fixed argument count, or `None` for the variadic lattice operations.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Connective::Const(_) => Some(0),
            Connective::LatMin | Connective::LatMax => None,
            Connective::Lattice(t) => Some(t.arity()),
            Connective::Pwl(_) => Some(1),
        }
    }

    pub fn accepts(&self, k: usize) -> Result<(), ConnectiveError> {
        match self.arity() {
            Some(expected) if expected != k => Err(ConnectiveError::Arity { expected, found: k }),
            None if k == 0 => Err(ConnectiveError::Arity {
                expected: 1,
                found: 0,
            }),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, args: &[Rational]) -> Rational {
        match self {
            Connective::Const(q) => q.clone(),
            Connective::LatMin => args.iter().min().cloned().expect("nonempty"),
            Connective::LatMax => args.iter().max().cloned().expect("nonempty"),
            Connective::Lattice(t) => t.eval(args),
            Connective::Pwl(points) => eval_pwl(points, &args[0]),
        }
    }

    /// A modulus respected by this connective on `[0,1]^k`.
    pub fn modulus(&self, k: usize) -> ModulusSpec {
        match self {
            Connective::Const(_) => ModulusSpec::zero(k),
            Connective::LatMin | Connective::LatMax => {
                if k == 1 {
                    ModulusSpec::projection(1, 0)
                } else {
                    ModulusSpec::max_of((0..k).map(|i| ModulusSpec::projection(k, i)).collect())
                        .expect("projections are linear")
                }
            }
            Connective::Lattice(t) => t.own_modulus(),
            Connective::Pwl(points) => {
                let lip = points
                    .windows(2)
                    .map(|w| ((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).abs())
                    .max()
                    .unwrap_or_else(Rational::zero);
                if lip.is_zero() {
                    ModulusSpec::zero(1)
                } else {
                    ModulusSpec::linear(vec![lip]).expect("nonnegative")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    /// `d(t, t')`.
    Dist(Term, Term),
    Rel(String, Vec<Term>),
    Conn(Connective, Vec<Formula>),
    Sup(usize, Box<Formula>),
    Inf(usize, Box<Formula>),
}

impl Formula {
    pub fn dist(a: Term, b: Term) -> Self {
        Formula::Dist(a, b)
    }

    pub fn sup(var: usize, body: Formula) -> Self {
        Formula::Sup(var, Box::new(body))
    }

    pub fn inf(var: usize, body: Formula) -> Self {
        Formula::Inf(var, Box::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Dist(..) | Formula::Rel(..))
    }

    /// No quantifiers.
    pub fn is_basic(&self) -> bool {
        match self {
            Formula::Dist(..) | Formula::Rel(..) => true,
            Formula::Conn(_, args) => args.iter().all(Formula::is_basic),
            Formula::Sup(..) | Formula::Inf(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        match self {
            Formula::Dist(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Rel(_, ts) => ts.iter().flat_map(Term::free_vars).collect(),
            Formula::Conn(_, args) => args.iter().flat_map(Formula::free_vars).collect(),
            Formula::Sup(i, body) | Formula::Inf(i, body) => {
                let mut s = body.free_vars();
                s.remove(i);
                s
            }
        }
    }

    /// Least `n` with all free variables among `v0..v(n-1)`.
    pub fn min_arity(&self) -> usize {
        self.free_vars().last().map_or(0, |m| m + 1)
    }
}
