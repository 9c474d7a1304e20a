//! Reified constraints over bounded integers, compiled to mixed-integer linear
//! programs with big-M indicator rows.
//!
//! Every front-end ([`reify`], [`sequence`], [`csp`]) lowers into the same
//! exact-integer [`Model`]. Models are solved by [`mip::solve_mip`], a
//! depth-first branch-and-bound over the bounded-variable simplex in [`lp`],
//! and cross-checked by the exhaustive [`oracle`].

pub mod cli;
pub mod csp;
pub mod error;
pub mod format;
pub mod lp;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod reify;
pub mod sequence;

pub use error::{Error, Result};
pub use model::{
    Assignment, LinearConstraint, Model, Objective, ObjectiveSense, Sense, VarId, VarKind,
    Variable, Violation,
};

/// Row feasibility tolerance used by the LP layer.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance used by the simplex.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Distance from the nearest integer below which an LP value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Default cap on the number of assignments exhaustive search may visit.
pub const DEFAULT_GUARD: u128 = 10_000_000;
