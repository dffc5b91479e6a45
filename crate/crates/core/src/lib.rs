//! Exact and floating-point toolkit for quantum matching theory at desk
//! scale: quantum permanents of bipartite unnormalized density matrices,
//! matroidal permanents and mixed discriminants, operator Sinkhorn
//! iterative scaling with capacity diagnostics, a deterministic decision
//! procedure for matroid-intersection instances hidden inside matrix
//! subspaces, classical matroid oracles for cross-validation, and a
//! block-matrix optimization gadget.
//!
//! The decision path is fully rational: every quantity it compares is an
//! exact `ComplexRational`, so verdicts are reproducible bit for bit.
//! Floating-point kernels exist only for long scaling trajectories,
//! estimators, and square-root-bearing diagnostics.

pub mod exactmat;
pub mod floatmat;
pub mod hardness;
pub mod hmip;
pub mod instances;
pub mod io;
pub mod matroid;
pub mod permanents;
pub mod qstate;
pub mod scaling;

pub use exactmat::{ComplexRational, Matrix, Rational};
pub use qstate::{Budm, CpOperator, PairFamily};
