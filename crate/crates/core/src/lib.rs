//! Noise content of observables in general probabilistic theories.
//!
//! An observable `A` has noise content `w(A)`: the largest weight `t` such
//! that `A = t·T + (1−t)·Ã` with `T` a trivial (state-independent)
//! observable. It equals the sum over outcomes of the infimum of each effect.
//! A collection of `m` observables whose noise contents add up to at least
//! `m − 1` is compatible, and [`compat::build_joint`] constructs a joint
//! observable for it.
//!
//! Backends: polytope state spaces (exact, with an LP decider for
//! compatibility), quantum POVMs (exact, via minimal eigenvalues) and process
//! POVMs on quantum channels (certified lower bounds).

pub mod channels;
pub mod compat;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod noise;
pub mod processes;
pub mod quantum;
pub mod real;
pub mod sample;
pub mod simplex;
pub mod theory;

/// Outcome label. Product outcomes are flattened with [`grid::encode`].
pub type Outcome = u64;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix, C64};
pub use theory::{
    embed_trivial, evaluate, mix, polytope_effect_from_vertex_values, validate_observable, Effect,
    Observable, Polytope, State, StateSpace, TrivialObservable, ValidationReport,
};
