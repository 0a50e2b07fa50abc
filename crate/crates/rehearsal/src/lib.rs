//! Rehearsal-based continual learning in overparameterized linear regression.
//!
//! Tasks are noisy linear models `y = xᵀw*_t + z` with Gaussian features. A
//! learner trains on tasks one after another, always moving to the minimum-norm
//! interpolator closest to its previous parameters, and replays a small memory
//! of old samples either jointly with the current task (concurrent), one old
//! task at a time (sequential), or a mix of both (hybrid).
//!
//! The crate offers a simulator ([`trainers`], [`montecarlo`]) and an exact
//! expectation engine ([`theory`]) for forgetting and generalization error,
//! plus numeric checks of the supporting scalar inequalities ([`verifier`]).

pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod problem;
pub mod rng;
pub mod solver;
pub mod theory;
pub mod trainers;
pub mod verifier;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
