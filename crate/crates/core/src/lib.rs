//! Online Bayesian rating: Kalman filter and simplified variants, reference
//! engines, skills-outcome models, synthetic seasons and evaluation.

pub mod engine;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod outcome;
pub mod parallel;
pub mod projection;
pub mod schedule;
pub mod synthetic;

pub use engine::{Algorithm, EngineConfig, Rater, RatingState};
pub use error::{Error, Result};
pub use outcome::{ModelKind, ModelSpec, OutcomeDerivatives};
pub use projection::CovarianceSummary;
pub use schedule::{DynamicsParams, GameRecord};
pub use parallel::Execution;
