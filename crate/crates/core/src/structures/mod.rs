//! Finite pre-structures with exact rational data.

mod load;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::modulus::ModulusSpec;
use crate::numeric::Rational;
use crate::syntax::Signature;

pub use load::{load_structure, parse_structure, LoadError};

/// All `arity`-tuples over `0..n`, lexicographic.
pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(arity)];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |p| {
                    let mut t = t.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

/// Position of `tuple` in [`all_tuples`]`(n, tuple.len())`.
pub fn tuple_index(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &p| acc * n + p)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("no points")]
    Empty,
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("metric must be {n}x{n}")]
    MetricShape { n: usize },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("table for `{name}` has {found} entries, expected {expected}")]
    TableSize {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("no interpretation given for `{0}`")]
    Missing(String),
}

/// A finite metric space with interpretations of a signature.
///
/// Construction only checks shapes; [`PreStructure::validate`] checks the
/// metric axioms and moduli.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreStructure {
    signature: Signature,
    pseudometric: bool,
    points: Vec<String>,
    /// Row-major `n x n`.
    metric: Vec<Rational>,
    relations: BTreeMap<String, Vec<Rational>>,
    functions: BTreeMap<String, Vec<usize>>,
    constants: BTreeMap<String, usize>,
}

impl PreStructure {
    pub fn new(
        signature: Signature,
        points: Vec<String>,
        metric: Vec<Vec<Rational>>,
        pseudometric: bool,
    ) -> Result<Self, StructureError> {
        let n = points.len();
        if n == 0 {
            return Err(StructureError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(StructureError::DuplicatePoint(p.clone()));
            }
        }
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(StructureError::MetricShape { n });
        }
        Ok(PreStructure {
            signature,
            pseudometric,
            points,
            metric: metric.into_iter().flatten().collect(),
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    /// Sets the table of a relation, indexed as in [`all_tuples`].
    pub fn set_relation(
        &mut self,
        name: &str,
        values: Vec<Rational>,
    ) -> Result<(), StructureError> {
        let sym = self
            .signature
            .relation(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
        let expected = self.points.len().pow(sym.arity as u32);
        if values.len() != expected {
            return Err(StructureError::TableSize {
                name: name.to_string(),
                expected,
                found: values.len(),
            });
        }
        self.relations.insert(name.to_string(), values);
        Ok(())
    }

    pub fn set_function(&mut self, name: &str, values: Vec<usize>) -> Result<(), StructureError> {
        let sym = self
            .signature
            .function(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
        let expected = self.points.len().pow(sym.arity as u32);
        if values.len() != expected {
            return Err(StructureError::TableSize {
                name: name.to_string(),
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= self.points.len()) {
            return Err(StructureError::PointOutOfRange(bad));
        }
        self.functions.insert(name.to_string(), values);
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, point: usize) -> Result<(), StructureError> {
        if !self.signature.is_constant(name) {
            return Err(StructureError::UnknownSymbol(name.to_string()));
        }
        if point >= self.points.len() {
            return Err(StructureError::PointOutOfRange(point));
        }
        self.constants.insert(name.to_string(), point);
        Ok(())
    }

    /// Errors if some symbol has no interpretation.
    pub fn check_complete(&self) -> Result<(), StructureError> {
        let sig = &self.signature;
        let missing = sig
            .relations()
            .iter()
            .map(|s| &s.name)
            .find(|n| !self.relations.contains_key(*n))
            .or_else(|| {
                sig.functions()
                    .iter()
                    .map(|s| &s.name)
                    .find(|n| !self.functions.contains_key(*n))
            })
            .or_else(|| {
                sig.constants()
                    .iter()
                    .find(|n| !self.constants.contains_key(*n))
            });
        match missing {
            Some(n) => Err(StructureError::Missing(n.clone())),
            None => Ok(()),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn is_pseudometric(&self) -> bool {
        self.pseudometric
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_name(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.metric[i * self.points.len() + j]
    }

    /// Coordinatewise distances `d(a_i, b_i)`.
    pub fn tuple_dists(&self, a: &[usize], b: &[usize]) -> Vec<Rational> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.dist(x, y).clone())
            .collect()
    }

    pub fn relation_value(&self, name: &str, tuple: &[usize]) -> Option<&Rational> {
        let t = self.relations.get(name)?;
        t.get(tuple_index(self.points.len(), tuple))
    }

    pub fn function_value(&self, name: &str, tuple: &[usize]) -> Option<usize> {
        let t = self.functions.get(name)?;
        t.get(tuple_index(self.points.len(), tuple)).copied()
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn names(&self, tuple: &[usize]) -> Vec<String> {
        tuple.iter().map(|&i| self.points[i].clone()).collect()
    }

    /// Whether the point map `sigma` preserves distances, every relation and
    /// function table, and every constant.
    pub fn is_automorphism(&self, sigma: &[usize]) -> bool {
        let n = self.len();
        if sigma.len() != n || (0..n).any(|i| !sigma.contains(&i)) {
            return false;
        }
        let img = |t: &[usize]| t.iter().map(|&i| sigma[i]).collect::<Vec<_>>();
        let sig = self.signature();
        (0..n).all(|i| (0..n).all(|j| self.dist(i, j) == self.dist(sigma[i], sigma[j])))
            && sig.relations().iter().all(|r| {
                all_tuples(n, r.arity).iter().all(|t| {
                    self.relation_value(&r.name, t) == self.relation_value(&r.name, &img(t))
                })
            })
            && sig.functions().iter().all(|f| {
                all_tuples(n, f.arity).iter().all(|t| {
                    self.function_value(&f.name, t).map(|v| sigma[v])
                        == self.function_value(&f.name, &img(t))
                })
            })
            && sig
                .constants()
                .iter()
                .all(|c| self.constant(c).map(|p| sigma[p]) == self.constant(c))
    }

    /// All automorphisms, found by trying every permutation of the points.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        fn permute(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..k {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    permute(k, cur, used, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut perms = Vec::new();
        permute(
            self.len(),
            &mut Vec::new(),
            &mut vec![false; self.len()],
            &mut perms,
        );
        perms.retain(|p| self.is_automorphism(p));
        perms
    }

    /// Exhaustive check of the metric axioms, value ranges and moduli.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.len();
        let name = |i: usize| self.points[i].clone();
        for i in 0..n {
            if !self.dist(i, i).is_zero() {
                v.push(Violation::DiagonalNonzero {
                    x: name(i),
                    value: self.dist(i, i).clone(),
                });
            }
            for j in 0..n {
                let dij = self.dist(i, j);
                if j > i && dij != self.dist(j, i) {
                    v.push(Violation::Asymmetric {
                        x: name(i),
                        y: name(j),
                        xy: dij.clone(),
                        yx: self.dist(j, i).clone(),
                    });
                }
                if !dij.in_unit_interval() {
                    v.push(Violation::OutOfRange {
                        what: format!("d({}, {})", name(i), name(j)),
                        value: dij.clone(),
                    });
                }
                if j > i && dij.is_zero() && !self.pseudometric {
                    v.push(Violation::ZeroDistance {
                        x: name(i),
                        y: name(j),
                    });
                }
            }
        }
        for via in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    let lhs = self.dist(a, b);
                    let rhs = self.dist(a, via) + self.dist(via, b);
                    if *lhs > rhs {
                        v.push(Violation::Triangle {
                            x: name(via),
                            y: name(a),
                            z: name(b),
                            lhs: lhs.clone(),
                            rhs,
                        });
                    }
                }
            }
        }
        for sym in self.signature.relations() {
            let Some(table) = self.relations.get(&sym.name) else {
                v.push(Violation::Missing {
                    symbol: sym.name.clone(),
                });
                continue;
            };
            let tuples = all_tuples(n, sym.arity);
            for (t, val) in tuples.iter().zip(table) {
                if !val.in_unit_interval() {
                    v.push(Violation::OutOfRange {
                        what: format!("{}({})", sym.name, self.names(t).join(", ")),
                        value: val.clone(),
                    });
                }
            }
            self.check_pairs(&tuples, &sym.modulus, &mut v, |s, t| {
                let lhs = (&table[tuple_index(n, s)] - &table[tuple_index(n, t)]).abs();
                (lhs, Kind::Relation(sym.name.clone()))
            });
        }
        for sym in self.signature.functions() {
            let Some(table) = self.functions.get(&sym.name) else {
                v.push(Violation::Missing {
                    symbol: sym.name.clone(),
                });
                continue;
            };
            let tuples = all_tuples(n, sym.arity);
            self.check_pairs(&tuples, &sym.modulus, &mut v, |s, t| {
                let lhs = self
                    .dist(table[tuple_index(n, s)], table[tuple_index(n, t)])
                    .clone();
                (lhs, Kind::Function(sym.name.clone()))
            });
        }
        for c in self.signature.constants() {
            if !self.constants.contains_key(c) {
                v.push(Violation::Missing { symbol: c.clone() });
            }
        }
        ValidationReport { violations: v }
    }

    fn check_pairs<F>(
        &self,
        tuples: &[Vec<usize>],
        modulus: &ModulusSpec,
        out: &mut Vec<Violation>,
        lhs: F,
    ) where
        F: Fn(&[usize], &[usize]) -> (Rational, Kind),
    {
        for (i, s) in tuples.iter().enumerate() {
            for t in &tuples[i + 1..] {
                let (l, kind) = lhs(s, t);
                let r = modulus.value(&self.tuple_dists(s, t));
                if l > r {
                    let (left, right) = (self.names(s), self.names(t));
                    out.push(match kind {
                        Kind::Relation(symbol) => Violation::RelationModulus {
                            symbol,
                            left,
                            right,
                            lhs: l,
                            rhs: r,
                        },
                        Kind::Function(symbol) => Violation::FunctionModulus {
                            symbol,
                            left,
                            right,
                            lhs: l,
                            rhs: r,
                        },
                    });
                }
            }
        }
    }
}

enum Kind {
    Relation(String),
    Function(String),
}

/// One failed invariant, with its witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DiagonalNonzero {
        x: String,
        value: Rational,
    },
    Asymmetric {
        x: String,
        y: String,
        xy: Rational,
        yx: Rational,
    },
    ZeroDistance {
        x: String,
        y: String,
    },
    OutOfRange {
        what: String,
        value: Rational,
    },
    /// `d(y, z) = lhs > d(y, x) + d(x, z) = rhs`.
    Triangle {
        x: String,
        y: String,
        z: String,
        lhs: Rational,
        rhs: Rational,
    },
    RelationModulus {
        symbol: String,
        left: Vec<String>,
        right: Vec<String>,
        lhs: Rational,
        rhs: Rational,
    },
    FunctionModulus {
        symbol: String,
        left: Vec<String>,
        right: Vec<String>,
        lhs: Rational,
        rhs: Rational,
    },
    Missing {
        symbol: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DiagonalNonzero { x, value } => write!(f, "d({x}, {x}) = {value} is not 0"),
            Violation::Asymmetric { x, y, xy, yx } => {
                write!(f, "asymmetric: d({x}, {y}) = {xy} but d({y}, {x}) = {yx}")
            }
            Violation::ZeroDistance { x, y } => {
                write!(
                    f,
                    "d({x}, {y}) = 0 for distinct points (set `pseudometric` to allow)"
                )
            }
            Violation::OutOfRange { what, value } => write!(f, "{what} = {value} outside [0,1]"),
            Violation::Triangle { x, y, z, lhs, rhs } => write!(
                f,
                "triangle ({x}, {y}, {z}): d({y}, {z}) = {lhs} > d({y}, {x}) + d({x}, {z}) = {rhs}"
            ),
            Violation::RelationModulus {
                symbol,
                left,
                right,
                lhs,
                rhs,
            } => write!(
                f,
                "{symbol} breaks its modulus at ({}) vs ({}): {lhs} > {rhs}",
                left.join(", "),
                right.join(", ")
            ),
            Violation::FunctionModulus {
                symbol,
                left,
                right,
                lhs,
                rhs,
            } => write!(
                f,
                "{symbol} breaks its modulus at ({}) vs ({}): {lhs} > {rhs}",
                left.join(", "),
                right.join(", ")
            ),
            Violation::Missing { symbol } => write!(f, "no interpretation for `{symbol}`"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
