//! Exact-rational workbench for valued constraint languages over finite domains.
//!
//! The crate decides membership in weighted relational clones and weighted
//! clones by exact conic linear programming, producing certificates that are
//! re-checked independently of the solver. Around that core it provides the
//! usual machinery: operations and clones, weighted relations and their
//! closure operations, weightings and weighted polymorphisms, a brute-force
//! VCSP solver, instance reductions, and rational constructions of the
//! irrational-parameter counterexample families.

pub mod algebra;
pub mod cli;
pub mod counterexamples;
pub mod error;
pub mod galois;
pub mod improve;
pub mod lp;
pub mod rational;
pub mod reductions;
pub mod vcsp;
pub mod wops;
pub mod wrel;

pub use algebra::{Caps, DomainSize, Label, Operation, OperationSet, TupleMatrix};
pub use error::{Error, Result};
pub use rational::{ExtRat, Rat};
pub use vcsp::VcspInstance;
pub use wops::Weighting;
pub use wrel::{Language, WeightedRelation};
