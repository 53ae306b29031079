//! Exact computation with continuous-logic formulas over finite metric
//! structures: moduli of uniform continuity, dense connective families,
//! and back-and-forth pseudo-distances.

pub mod dense;
pub mod evaluation;
pub mod modulus;
pub mod numeric;
pub mod scott;
pub mod structures;
pub mod syntax;

pub use dense::{LatticeTerm, SegmentConnective};
pub use evaluation::{eval_formula, eval_formula_value};
pub use modulus::{ModulusSpec, WeakModulus};
pub use numeric::{rat, Rational, UnitValue};
pub use scott::{AnalysisConfig, BFTable, FixpointTrace, RankReport};
pub use structures::{load_structure, parse_structure, PreStructure};
pub use syntax::{parse_formula, Connective, Formula, Signature, Term};
