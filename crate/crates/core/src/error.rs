use thiserror::Error;

/// Violations of the HTN model's structural or semantic rules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("operator `{0}` is not applicable in the given state")]
    NotApplicable(String),
    #[error("method `{method}` decomposes `{head}`, not the label of node {node}")]
    MethodNotApplicable { method: String, head: String, node: u32 },
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("order constraint ({0}, {1}) would create a cycle")]
    CyclicOrder(u32, u32),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("invalid execution: {0}")]
    InvalidExecution(String),
}

/// Rejected configuration values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("inverse temperature beta must be > 0, got {0}")]
    Beta(f64),
    #[error("detection probability rho must lie in (0, 1], got {0}")]
    Rho(f64),
    #[error("gamma must be > 0, got {0}")]
    Gamma(f64),
    #[error("top-k size must be at least 1")]
    TopK,
    #[error("progress prior table must be nonnegative and sum to 1 (sum = {0})")]
    ProgressTable(f64),
    #[error("hypothesis priors must be positive with a positive sum: {0}")]
    Priors(String),
    #[error("{0}")]
    Other(String),
}
