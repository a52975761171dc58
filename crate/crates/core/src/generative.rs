//! The three-stage generative model of observed behaviour.
//!
//! Stage I picks methods with a Boltzmann distribution over method cost,
//! Stage II picks each next action uniformly among the available ones, and
//! Stage III turns the executed plan into observations: an unknown number of
//! steps `t` has been executed (the progress prior), and each executed step is
//! detected independently with probability `rho`.

use std::collections::BTreeSet;

use crate::error::ConfigError;
use crate::model::{DecompositionTrace, Domain, Execution, MethodId, OpId, State};
use crate::prob::LogProb;

/// Distribution over how many plan steps had run when observing.
#[derive(Clone, Debug, PartialEq)]
pub enum ProgressPrior {
    /// `1 / (|π| + 1)` for every `t` in `0..=|π|`.
    Uniform,
    /// All mass on exactly `t` executed steps.
    Point(usize),
    /// Explicit weights for `t = 0, 1, ...`; missing entries are zero.
    Custom(Vec<f64>),
}

impl ProgressPrior {
    pub fn prob(&self, t: usize, plan_len: usize) -> f64 {
        if t > plan_len {
            return 0.0;
        }
        match self {
            ProgressPrior::Uniform => 1.0 / (plan_len as f64 + 1.0),
            ProgressPrior::Point(at) => f64::from(u8::from(*at == t)),
            ProgressPrior::Custom(table) => table.get(t).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerativeConfig {
    /// Inverse temperature of the method distribution.
    pub beta: f64,
    /// Per-step detection probability.
    pub rho: f64,
    pub progress_prior: ProgressPrior,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        GenerativeConfig { beta: 1.0, rho: 1.0, progress_prior: ProgressPrior::Uniform }
    }
}

impl GenerativeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(ConfigError::Beta(self.beta));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(ConfigError::Rho(self.rho));
        }
        if let ProgressPrior::Custom(table) = &self.progress_prior {
            let sum: f64 = table.iter().sum();
            if table.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(ConfigError::ProgressTable(sum));
            }
        }
        Ok(())
    }

    /// Full observability: every executed step is observed.
    pub fn fully_observed(&self) -> bool {
        self.rho == 1.0
    }
}

/// Log of the Boltzmann probability of `method` among the methods currently
/// offered for its head.
pub fn method_logprob(domain: &Domain, method: MethodId, config: &GenerativeConfig) -> LogProb {
    let head = domain.method(method).head;
    let siblings = domain.methods_for(head);
    if !siblings.contains(&method) {
        return LogProb::ZERO;
    }
    let scores: Vec<f64> = siblings.iter().map(|m| -config.beta * domain.method(*m).cost).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    LogProb::from_ln(-config.beta * domain.method(method).cost - max - norm.ln())
}

pub fn method_prob(domain: &Domain, method: MethodId, config: &GenerativeConfig) -> f64 {
    method_logprob(domain, method, config).prob()
}

/// Stage I: product of method probabilities over the trace.
pub fn decomposition_logprob(domain: &Domain, trace: &DecompositionTrace, config: &GenerativeConfig) -> LogProb {
    trace.methods().map(|m| method_logprob(domain, m, config)).sum()
}

/// Stage II: `Σ_t log(1/|A_t|)`, or zero probability as soon as the executed
/// node is not in the available set.
pub fn linearization_logprob(domain: &Domain, exec: &Execution, s0: &State) -> LogProb {
    let mut done = BTreeSet::new();
    let mut state = s0.clone();
    let mut total = 0.0;
    for &node in &exec.linearization {
        let available = exec.network.available_set(domain, &done, &state, &exec.inserted);
        if !available.contains(&node) {
            return LogProb::ZERO;
        }
        total -= (available.len() as f64).ln();
        let Some(op) = exec.op_of(node) else { return LogProb::ZERO };
        state = domain.operator(op).apply_unchecked(&state);
        done.insert(node);
    }
    let expected = exec.network.len() + exec.inserted.len();
    if done.len() != expected {
        return LogProb::ZERO;
    }
    LogProb::from_ln(total)
}

/// Number of monotone embeddings of `observations` into `prefix`, i.e. of
/// strictly increasing index maps `e` with `observations[i] == prefix[e(i)]`.
/// Saturates at `u128::MAX`.
pub fn embedding_count<T: PartialEq>(observations: &[T], prefix: &[T]) -> u128 {
    // row[i] = embeddings of observations[..i] into the prefix read so far.
    let mut row = vec![0u128; observations.len() + 1];
    row[0] = 1;
    for symbol in prefix {
        for i in (1..=observations.len()).rev() {
            if observations[i - 1] == *symbol {
                row[i] = row[i].saturating_add(row[i - 1]);
            }
        }
    }
    row[observations.len()]
}

/// Per-prefix embedding counts: entry `t` counts embeddings into `plan[..t]`.
fn embedding_counts_by_prefix<T: PartialEq>(observations: &[T], plan: &[T]) -> Vec<f64> {
    let m = observations.len();
    let mut row = vec![0f64; m + 1];
    row[0] = 1.0;
    let mut out = Vec::with_capacity(plan.len() + 1);
    out.push(row[m]);
    for symbol in plan {
        for i in (1..=m).rev() {
            if observations[i - 1] == *symbol {
                row[i] += row[i - 1];
            }
        }
        out.push(row[m]);
    }
    out
}

fn detection_weight(observed: usize, executed: usize, rho: f64) -> f64 {
    rho.powi(observed as i32) * (1.0 - rho).powi((executed - observed) as i32)
}

/// `P(ô | π_{1:t})`: embeddings × ρ^|ô| × (1−ρ)^(t−|ô|). With ρ = 1 this is
/// the indicator `ô == π_{1:t}`.
pub fn alignment_likelihood(observations: &[OpId], plan: &[OpId], t: usize, config: &GenerativeConfig) -> f64 {
    assert!(t <= plan.len(), "executed length {t} exceeds plan length {}", plan.len());
    if t < observations.len() {
        return 0.0;
    }
    embedding_count(observations, &plan[..t]) as f64 * detection_weight(observations.len(), t, config.rho)
}

/// `P(ô | π)`: alignment likelihood marginalized over the progress prior.
pub fn observation_likelihood(observations: &[OpId], plan: &[OpId], config: &GenerativeConfig) -> f64 {
    let m = observations.len();
    if m > plan.len() {
        return 0.0;
    }
    let counts = embedding_counts_by_prefix(observations, plan);
    (m..=plan.len())
        .map(|t| {
            let prior = config.progress_prior.prob(t, plan.len());
            if prior == 0.0 || counts[t] == 0.0 {
                0.0
            } else {
                prior * counts[t] * detection_weight(m, t, config.rho)
            }
        })
        .sum()
}

/// Unnormalized joint of an execution: Stage I × Stage II, times Stage III
/// when observations are given. Zero for invalid executions.
pub fn joint_tilde_logprob(
    domain: &Domain,
    observations: Option<&[OpId]>,
    exec: &Execution,
    s0: &State,
    config: &GenerativeConfig,
) -> LogProb {
    if exec.validate(domain, s0).is_err() {
        return LogProb::ZERO;
    }
    let base = decomposition_logprob(domain, &exec.trace, config) + linearization_logprob(domain, exec, s0);
    match observations {
        None => base,
        Some(obs) => base + LogProb::from_prob(observation_likelihood(obs, &exec.actions(), config)),
    }
}
