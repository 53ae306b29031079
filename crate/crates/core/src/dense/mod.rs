//! Segment functions, lattice terms over them, and the dense family of
//! basic formulas built from them.

mod approx;
mod family;
mod lattice;
mod segment;

pub use approx::{
    default_budget, lattice_approximate, ApproxError, Approximation, UnitGridFunction,
};
pub use family::{
    enumerate_family, nondegenerate_atomics, DenseFamilyIndex, FamilyEnumerator, FamilyMember,
    MemberBody,
};
pub use lattice::{lattice_eval, LatticeError, LatticeTerm};
pub use segment::{segment_norm_bound, SegmentConnective, SegmentError};
