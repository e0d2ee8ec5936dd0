//! Bayesian D-optimal experimental designs for systems with a continuous and
//! a binary quality response.
//!
//! The binary response follows a GLM in the design effects and the
//! continuous response a linear model whose coefficients depend on the
//! binary outcome. Designs maximise the joint log-determinant criterion
//! [`criterion::q_value`] by point exchange over a full factorial candidate
//! set, locally for one parameter value or globally by pooling local designs
//! over prior samples.

pub mod cli;
pub mod config;
pub mod criterion;
pub mod error;
pub mod factors;
pub mod io;
pub mod linalg;
pub mod link;
pub mod model;
pub mod priors;
pub mod regularity;
pub mod search;

pub use criterion::{efficiency, q_value, CriterionConfig, Evaluator, FrequencyDesign, Objective};
pub use error::{Error, Result};
pub use factors::{FactorKind, FactorSpec};
pub use link::Link;
pub use model::{CandidateSet, Design, Effect, ModelSpec};
pub use search::{baseline_design, global_design, local_search, BaselineKind, SearchConfig};
