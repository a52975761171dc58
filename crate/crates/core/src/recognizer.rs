//! Probabilistic goal recognition over HTN hypotheses: top-K selection with
//! the dummy-root loop, per-hypothesis likelihood ratios, and posteriors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::generative::{joint_tilde_logprob, GenerativeConfig};
use crate::io::{ObservationFile, ProblemFile};
use crate::model::{Domain, OpId, State, TaskNetwork};
use crate::planner::{compile_observations, EmbeddingMode, PlanError, Planner, PlannerLimits, SearchMode, Solution};
use crate::prob::{log_sum_exp, normalize_priors, LogProb};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Ratio of the three-stage joint of the observation-constrained
    /// execution to the joint of the unconstrained one.
    ThreeStage,
    /// `exp(-γ c(π⁺)) / exp(-γ c(π_base))`.
    Simplified,
    /// First solution of a single dummy-root call gets all the mass.
    Baseline,
    /// Exhaustive enumeration; produced only by the oracle.
    Exact,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::ThreeStage, Estimator::Simplified, Estimator::Baseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::ThreeStage => "three-stage",
            Estimator::Simplified => "simplified",
            Estimator::Baseline => "baseline",
            Estimator::Exact => "exact",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| ConfigError::Other(format!("unknown estimator `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionConfig {
    pub generative: GenerativeConfig,
    /// Temperature of the simplified estimator.
    pub gamma: f64,
    pub k: usize,
    pub estimator: Estimator,
    pub limits: PlannerLimits,
    /// Task insertion for both planner calls; the penalty lives in `limits`.
    pub insertion: bool,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        RecognitionConfig {
            generative: GenerativeConfig::default(),
            gamma: 1.0,
            k: 5,
            estimator: Estimator::ThreeStage,
            limits: PlannerLimits::default(),
            insertion: false,
        }
    }
}

impl RecognitionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.generative.validate()?;
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        if self.k == 0 {
            return Err(ConfigError::TopK);
        }
        if !(self.limits.insertion_penalty >= 0.0 && self.limits.insertion_penalty.is_finite()) {
            return Err(ConfigError::Other(format!("insertion penalty must be >= 0, got {}", self.limits.insertion_penalty)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub name: String,
    pub network: TaskNetwork,
    pub prior: f64,
}

#[derive(Clone, Debug)]
pub struct PhgrInstance {
    pub domain: Domain,
    pub s0: State,
    pub hypotheses: Vec<Hypothesis>,
    pub observations: Vec<OpId>,
    pub config: RecognitionConfig,
}

impl PhgrInstance {
    /// Validates the configuration and normalizes the priors, which must be
    /// positive.
    pub fn new(
        domain: Domain,
        s0: State,
        hypotheses: Vec<(String, TaskNetwork, f64)>,
        observations: Vec<OpId>,
        config: RecognitionConfig,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let raw: Vec<f64> = hypotheses.iter().map(|h| h.2).collect();
        if let Some((name, ..)) = hypotheses.iter().find(|h| !(h.2 > 0.0)) {
            return Err(ConfigError::Priors(format!("prior of `{name}` must be positive")));
        }
        let priors = normalize_priors(&raw)?;
        for (i, (name, ..)) in hypotheses.iter().enumerate() {
            if hypotheses[..i].iter().any(|h| &h.0 == name) {
                return Err(ConfigError::Other(format!("duplicate hypothesis `{name}`")));
            }
        }
        let hypotheses = hypotheses
            .into_iter()
            .zip(priors)
            .map(|((name, network, _), prior)| Hypothesis { name, network, prior })
            .collect();
        Ok(PhgrInstance { domain, s0, hypotheses, observations, config })
    }

    pub fn from_files(
        domain: Domain,
        problem: ProblemFile,
        observations: ObservationFile,
        config: RecognitionConfig,
    ) -> Result<Self, ConfigError> {
        let hyps = problem.hypotheses.into_iter().zip(problem.priors).map(|((n, g), p)| (n, g, p)).collect();
        PhgrInstance::new(domain, problem.initial_state, hyps, observations.symbols, config)
    }

    fn embedding_mode(&self) -> EmbeddingMode {
        if self.config.generative.fully_observed() {
            EmbeddingMode::Prefix
        } else {
            EmbeddingMode::Subsequence
        }
    }

    fn planner<'a>(&self, domain: &'a Domain) -> Planner<'a> {
        Planner::new(domain, self.config.limits.clone()).with_insertion(self.config.insertion)
    }

    /// Three-stage joint of an execution of this instance's domain.
    pub fn joint(&self, solution: &Solution, observed: bool) -> LogProb {
        let obs = observed.then_some(self.observations.as_slice());
        joint_tilde_logprob(&self.domain, obs, &solution.execution, &self.s0, &self.config.generative)
    }

    /// Unconstrained plan for hypothesis `index`.
    pub fn plan_unconstrained(&self, index: usize) -> Result<Solution, PlanError> {
        let planner = self.planner(&self.domain);
        let planner = match self.config.limits.mode {
            SearchMode::MinCost => planner,
            SearchMode::ExhaustiveMaxProbability => planner.with_scorer(|sol: &Solution| self.joint(sol, false)),
        };
        planner.plan(&self.s0, &self.hypotheses[index].network)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Evaluated,
    NotSelected,
    PlannerTimeout,
    Infeasible,
}

/// Why the top-K loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopEnd {
    KReached,
    /// Every hypothesis was selected.
    Exhausted,
    Unsolvable,
    ResourceLimit,
}

#[derive(Clone, Debug)]
pub struct TopK {
    /// Hypothesis indices with their decoded observation-consistent
    /// solutions, in discovery order.
    pub selected: Vec<(usize, Solution)>,
    pub end: LoopEnd,
    pub planner_calls: usize,
}

/// Repeatedly plans on the dummy-root instance, removing the root method of
/// each hypothesis found, until `k` hypotheses are collected or planning
/// fails.
pub fn topk_select(instance: &PhgrInstance, k: usize) -> TopK {
    let compiled = compile_observations(&instance.domain, &instance.observations, instance.embedding_mode());
    let networks: Vec<TaskNetwork> = instance.hypotheses.iter().map(|h| h.network.clone()).collect();
    let mut root = compiled.build_dummy_root(&networks);
    let s0 = compiled.initial_state(&instance.s0);
    let mut selected = Vec::new();
    let mut planner_calls = 0;
    let end = loop {
        if selected.len() >= k {
            break LoopEnd::KReached;
        }
        if root.remaining() == 0 {
            break LoopEnd::Exhausted;
        }
        planner_calls += 1;
        let result = {
            let planner = instance.planner(&root.domain);
            let planner = match instance.config.limits.mode {
                SearchMode::MinCost => planner,
                SearchMode::ExhaustiveMaxProbability => planner.with_scorer(|sol: &Solution| {
                    root.split(sol, &compiled).map_or(LogProb::ZERO, |(_, decoded)| instance.joint(&decoded, true))
                }),
            };
            planner.plan(&s0, &root.network)
        };
        match result {
            Ok(sol) => {
                let (h, decoded) = root.split(&sol, &compiled).expect("dummy-root solutions start with a root method");
                log::debug!("selected `{}` with cost {}", instance.hypotheses[h].name, decoded.total_cost);
                root.remove_hypothesis(h);
                selected.push((h, decoded));
            }
            Err(PlanError::Unsolvable) => break LoopEnd::Unsolvable,
            Err(e @ PlanError::ResourceExhausted { .. }) => {
                log::warn!("top-k loop stopped: {e}");
                break LoopEnd::ResourceLimit;
            }
        }
    };
    TopK { selected, end, planner_calls }
}

/// Hypothesis of the first dummy-root solution, if any.
pub fn baseline_recognize(instance: &PhgrInstance) -> Option<&str> {
    let top = topk_select(instance, 1);
    top.selected.first().map(|(h, _)| instance.hypotheses[*h].name.as_str())
}

/// Log-numerator and log-denominator of the three-stage ratio.
pub fn approx_likelihood_three_stage(instance: &PhgrInstance, constrained: &Solution, base: &Solution) -> (LogProb, LogProb) {
    let numerator = if instance.observations.is_empty() { base } else { constrained };
    (instance.joint(numerator, true), instance.joint(base, false))
}

pub fn approx_likelihood_simplified(instance: &PhgrInstance, constrained: &Solution, base: &Solution) -> (LogProb, LogProb) {
    let gamma = instance.config.gamma;
    (LogProb::from_ln(-gamma * constrained.total_cost), LogProb::from_ln(-gamma * base.total_cost))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub k: usize,
    pub estimator: Estimator,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub name: String,
    pub status: HypothesisStatus,
    /// Natural log; `null` when zero or not computed.
    pub log_numerator: LogProb,
    pub log_denominator: LogProb,
    pub posterior: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub config: ReportConfig,
    /// Sorted by descending posterior, ties by name.
    pub hypotheses: Vec<HypothesisResult>,
}

impl PosteriorReport {
    pub fn top(&self, n: usize) -> impl Iterator<Item = &HypothesisResult> {
        self.hypotheses.iter().filter(|h| h.status == HypothesisStatus::Evaluated).take(n)
    }

    pub fn posterior_of(&self, name: &str) -> Option<f64> {
        self.hypotheses.iter().find(|h| h.name == name).map(|h| h.posterior)
    }

    pub fn evaluated(&self) -> usize {
        self.hypotheses.iter().filter(|h| h.status == HypothesisStatus::Evaluated).count()
    }
}

/// Normalizes `ratio · prior` over the evaluated entries and sorts.
/// `entries` holds `(status, log_num, log_den)` per hypothesis of `instance`.
pub fn posterior(instance: &PhgrInstance, entries: &[(HypothesisStatus, LogProb, LogProb)], estimator: Estimator) -> PosteriorReport {
    let weight = |i: usize| -> LogProb {
        let (_, num, den) = entries[i];
        num.ratio(den) + LogProb::from_prob(instance.hypotheses[i].prior)
    };
    let evaluated: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].0 == HypothesisStatus::Evaluated).collect();
    let total = log_sum_exp(evaluated.iter().map(|&i| weight(i)));
    let mut hypotheses: Vec<HypothesisResult> = entries
        .iter()
        .enumerate()
        .map(|(i, &(status, num, den))| HypothesisResult {
            name: instance.hypotheses[i].name.clone(),
            status,
            log_numerator: num,
            log_denominator: den,
            posterior: if status == HypothesisStatus::Evaluated { weight(i).ratio(total).prob() } else { 0.0 },
        })
        .collect();
    hypotheses.sort_by(|a, b| b.posterior.total_cmp(&a.posterior).then_with(|| a.name.cmp(&b.name)));
    let cfg = &instance.config;
    PosteriorReport {
        config: ReportConfig {
            beta: cfg.generative.beta,
            gamma: cfg.gamma,
            rho: cfg.generative.rho,
            k: cfg.k,
            estimator,
            seed: None,
        },
        hypotheses,
    }
}

/// Planner results shared by all estimators: the top-K selection and one
/// unconstrained solution per selected hypothesis.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub topk: TopK,
    /// Aligned with `topk.selected`.
    pub base: Vec<Result<Solution, PlanError>>,
}

impl Evaluation {
    pub fn run(instance: &PhgrInstance) -> Evaluation {
        let topk = topk_select(instance, instance.config.k);
        let base = topk.selected.par_iter().map(|(h, _)| instance.plan_unconstrained(*h)).collect();
        Evaluation { topk, base }
    }

    /// At most `2K`.
    pub fn planner_calls(&self) -> usize {
        self.topk.planner_calls + self.base.len()
    }

    fn unselected_status(&self) -> HypothesisStatus {
        match self.topk.end {
            LoopEnd::KReached | LoopEnd::Exhausted => HypothesisStatus::NotSelected,
            LoopEnd::Unsolvable => HypothesisStatus::Infeasible,
            LoopEnd::ResourceLimit => HypothesisStatus::PlannerTimeout,
        }
    }

    pub fn report(&self, instance: &PhgrInstance, estimator: Estimator) -> PosteriorReport {
        let n = instance.hypotheses.len();
        let mut entries = vec![(self.unselected_status(), LogProb::ZERO, LogProb::ZERO); n];
        if estimator == Estimator::Baseline {
            if let Some((h, _)) = self.topk.selected.first() {
                for e in entries.iter_mut() {
                    e.0 = HypothesisStatus::NotSelected;
                }
                entries[*h] = (HypothesisStatus::Evaluated, LogProb::ONE, LogProb::ONE);
            }
            return posterior(instance, &entries, estimator);
        }
        for ((h, constrained), base) in self.topk.selected.iter().zip(&self.base) {
            entries[*h] = match base {
                Err(PlanError::ResourceExhausted { .. }) => (HypothesisStatus::PlannerTimeout, LogProb::ZERO, LogProb::ZERO),
                Err(PlanError::Unsolvable) => (HypothesisStatus::Infeasible, LogProb::ZERO, LogProb::ZERO),
                Ok(base) => {
                    let (num, den) = match estimator {
                        Estimator::Simplified => approx_likelihood_simplified(instance, constrained, base),
                        _ => approx_likelihood_three_stage(instance, constrained, base),
                    };
                    let status =
                        if num.is_zero() || den.is_zero() { HypothesisStatus::Infeasible } else { HypothesisStatus::Evaluated };
                    (status, num, den)
                }
            };
        }
        posterior(instance, &entries, estimator)
    }
}

/// Full pipeline with the configured estimator.
pub fn recognize(instance: &PhgrInstance) -> PosteriorReport {
    if instance.config.estimator == Estimator::Baseline {
        let topk = topk_select(instance, 1);
        return Evaluation { topk, base: Vec::new() }.report(instance, Estimator::Baseline);
    }
    Evaluation::run(instance).report(instance, instance.config.estimator)
}
