//! Probabilistic goal recognition over ground hierarchical task networks.

pub mod error;
pub mod generative;
pub mod harness;
pub mod io;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod prob;
pub mod recognizer;

pub use error::{ConfigError, ModelError};
pub use prob::LogProb;
