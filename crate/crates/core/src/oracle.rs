//! Ground truth by brute force on tiny instances: every decomposition and
//! every executable linearization (with bounded insertion), exact
//! likelihoods and posteriors, and a forward sampler of the generative
//! story.
//!
//! Stage I, II and III are recomputed here from their definitions rather
//! than through [`crate::generative`], so the two can check each other.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::generative::GenerativeConfig;
use crate::model::{DecompositionTrace, Domain, Execution, MethodId, NodeId, OpId, State, Task, TaskNetwork};
use crate::prob::LogProb;
use crate::recognizer::{posterior, Estimator, HypothesisStatus, PhgrInstance, PosteriorReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBounds {
    /// Maximum nesting depth of decomposed compound tasks.
    pub max_decomposition_depth: usize,
    pub max_primitive_nodes: usize,
    /// Zero disables insertion.
    pub max_insertions: usize,
    pub max_executions: usize,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds { max_decomposition_depth: 8, max_primitive_nodes: 10, max_insertions: 2, max_executions: 200_000 }
    }
}

impl EnumerationBounds {
    pub fn without_insertion(self) -> Self {
        EnumerationBounds { max_insertions: 0, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration exceeded the {bound} bound ({limit})")]
    BoundExceeded { bound: &'static str, limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("no executable action or applicable method while tasks remain")]
    DeadEnd,
    #[error("decomposition deeper than {0} levels")]
    TooDeep(usize),
}

/// An enumerated execution with its Stage I × Stage II weight and, when
/// observations were supplied, the Stage III factor folded into `joint`.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumerated {
    pub execution: Execution,
    pub base: LogProb,
    pub joint: LogProb,
}

fn exceeded(bound: &'static str, limit: usize) -> OracleError {
    OracleError::BoundExceeded { bound, limit }
}

fn stage_one(domain: &Domain, method: MethodId, beta: f64) -> f64 {
    let head = domain.method(method).head;
    let z: f64 = domain.methods_for(head).iter().map(|&m| (-beta * domain.method(m).cost).exp()).sum();
    (-beta * domain.method(method).cost).exp() / z
}

/// Every primitive network reachable from `g`, resolving the lowest-id
/// compound node first.
fn decompositions(
    domain: &Domain,
    g: &TaskNetwork,
    bounds: &EnumerationBounds,
    beta: f64,
) -> Result<Vec<(TaskNetwork, DecompositionTrace, f64)>, OracleError> {
    fn go(
        domain: &Domain,
        net: TaskNetwork,
        depth: BTreeMap<NodeId, usize>,
        trace: Vec<(NodeId, MethodId)>,
        weight: f64,
        bounds: &EnumerationBounds,
        beta: f64,
        out: &mut Vec<(TaskNetwork, DecompositionTrace, f64)>,
    ) -> Result<(), OracleError> {
        let primitives = net.nodes().filter(|(_, t)| matches!(t, Task::Primitive(_))).count();
        if primitives > bounds.max_primitive_nodes {
            return Err(exceeded("primitive nodes", bounds.max_primitive_nodes));
        }
        let Some((node, Task::Compound(head))) = net.nodes().find(|(_, t)| matches!(t, Task::Compound(_))) else {
            out.push((net, DecompositionTrace { steps: trace }, weight));
            return Ok(());
        };
        let d = depth[&node];
        if d >= bounds.max_decomposition_depth {
            return Err(exceeded("decomposition depth", bounds.max_decomposition_depth));
        }
        for &m in domain.methods_for(head) {
            let next = net.decompose(node, domain.method(m), domain).expect("head matches");
            let mut next_depth = depth.clone();
            next_depth.remove(&node);
            for id in next.node_ids().filter(|id| id.0 >= net.next_id()) {
                next_depth.insert(id, d + 1);
            }
            let mut next_trace = trace.clone();
            next_trace.push((node, m));
            go(domain, next, next_depth, next_trace, weight * stage_one(domain, m, beta), bounds, beta, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    let depth = g.node_ids().map(|n| (n, 0)).collect();
    go(domain, g.clone(), depth, Vec::new(), 1.0, bounds, beta, &mut out)?;
    Ok(out)
}

/// Stage II from its definition: at each step the executable set holds the
/// unexecuted network nodes whose predecessors ran and whose operator
/// applies, plus the applicable inserted actions not yet run.
fn stage_two(domain: &Domain, exec: &Execution, s0: &State) -> f64 {
    let mut state = s0.clone();
    let mut done: BTreeSet<NodeId> = BTreeSet::new();
    let mut p = 1.0;
    for &step in &exec.linearization {
        let mut available = 0usize;
        let mut chosen_available = false;
        for (id, task) in exec.network.nodes() {
            let Task::Primitive(op) = task else { return 0.0 };
            let ready = !done.contains(&id)
                && exec.network.edges().all(|(a, b)| b != id || done.contains(&a))
                && domain.operator(op).is_applicable(&state);
            if ready {
                available += 1;
                chosen_available |= id == step;
            }
        }
        for (&id, &op) in &exec.inserted {
            if !done.contains(&id) && domain.operator(op).is_applicable(&state) {
                available += 1;
                chosen_available |= id == step;
            }
        }
        if !chosen_available {
            return 0.0;
        }
        p /= available as f64;
        let op = exec.op_of(step).expect("step belongs to the execution");
        state = domain.operator(op).apply(&state).expect("available implies applicable");
        done.insert(step);
    }
    p
}

/// Embeddings of `obs` into `plan`, counted by plain recursion.
fn count_embeddings(obs: &[OpId], plan: &[OpId]) -> f64 {
    match obs.split_first() {
        None => 1.0,
        Some((first, rest)) => (0..plan.len())
            .filter(|&j| plan[j] == *first)
            .map(|j| count_embeddings(rest, &plan[j + 1..]))
            .sum(),
    }
}

/// Stage III from its definition: sum over executed-prefix lengths `t` of
/// prior(t) × embeddings into the prefix × ρ^m (1−ρ)^(t−m).
fn stage_three(obs: &[OpId], plan: &[OpId], config: &GenerativeConfig) -> f64 {
    let m = obs.len();
    (m..=plan.len())
        .map(|t| {
            let prior = config.progress_prior.prob(t, plan.len());
            let miss = if t == m { 1.0 } else { (1.0 - config.rho).powi((t - m) as i32) };
            prior * count_embeddings(obs, &plan[..t]) * config.rho.powi(m as i32) * miss
        })
        .sum()
}

/// All executions of `g` within `bounds`, in a deterministic order.
pub fn enumerate(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    observations: Option<&[OpId]>,
    config: &GenerativeConfig,
    bounds: &EnumerationBounds,
) -> Result<Vec<Enumerated>, OracleError> {
    let insertable = domain.insertable_operators();
    let mut out = Vec::new();
    for (network, trace, weight) in decompositions(domain, g, bounds, config.beta)? {
        let mut walk = Walk {
            domain,
            network: &network,
            insertable: &insertable,
            bounds,
            sequences: Vec::new(),
            current: Vec::new(),
            budget: bounds.max_executions.saturating_sub(out.len()),
        };
        walk.run(s0.clone(), &mut BTreeSet::new(), 0)?;
        for seq in walk.sequences {
            let mut inserted = BTreeMap::new();
            let linearization = seq
                .into_iter()
                .map(|step| match step {
                    Step::Node(n) => n,
                    Step::Insert(op) => {
                        let id = NodeId::inserted(inserted.len());
                        inserted.insert(id, op);
                        id
                    }
                })
                .collect();
            let execution =
                Execution { root: g.clone(), network: network.clone(), trace: trace.clone(), linearization, inserted };
            let base = weight * stage_two(domain, &execution, s0);
            let joint = match observations {
                None => base,
                Some(obs) => base * stage_three(obs, &execution.actions(), config),
            };
            out.push(Enumerated { execution, base: LogProb::from_prob(base), joint: LogProb::from_prob(joint) });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Step {
    Node(NodeId),
    Insert(OpId),
}

struct Walk<'a> {
    domain: &'a Domain,
    network: &'a TaskNetwork,
    insertable: &'a [OpId],
    bounds: &'a EnumerationBounds,
    sequences: Vec<Vec<Step>>,
    current: Vec<Step>,
    budget: usize,
}

impl Walk<'_> {
    fn run(&mut self, state: State, done: &mut BTreeSet<NodeId>, insertions: usize) -> Result<(), OracleError> {
        if done.len() == self.network.len() {
            if self.sequences.len() >= self.budget {
                return Err(exceeded("executions", self.bounds.max_executions));
            }
            self.sequences.push(self.current.clone());
        }
        let ready: Vec<(NodeId, OpId)> = self
            .network
            .nodes()
            .filter_map(|(id, task)| match task {
                Task::Primitive(op)
                    if !done.contains(&id)
                        && self.network.edges().all(|(a, b)| b != id || done.contains(&a))
                        && self.domain.operator(op).is_applicable(&state) =>
                {
                    Some((id, op))
                }
                _ => None,
            })
            .collect();
        for (id, op) in ready {
            done.insert(id);
            self.current.push(Step::Node(id));
            self.run(self.domain.operator(op).apply(&state).expect("applicable"), done, insertions)?;
            self.current.pop();
            done.remove(&id);
        }
        if insertions < self.bounds.max_insertions {
            for &op in self.insertable {
                if self.domain.operator(op).is_applicable(&state) {
                    self.current.push(Step::Insert(op));
                    self.run(self.domain.operator(op).apply(&state).expect("applicable"), done, insertions + 1)?;
                    self.current.pop();
                }
            }
        }
        Ok(())
    }
}

/// Executions with their joint: Stage I × II, times Stage III iff
/// observations are given.
pub fn enumerate_executions(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    observations: Option<&[OpId]>,
    config: &GenerativeConfig,
    bounds: &EnumerationBounds,
) -> Result<Vec<(Execution, LogProb)>, OracleError> {
    Ok(enumerate(domain, g, s0, observations, config, bounds)?.into_iter().map(|e| (e.execution, e.joint)).collect())
}

/// Sums `(Σ joint with observations, Σ joint without)`.
pub fn likelihood_terms(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    observations: &[OpId],
    config: &GenerativeConfig,
    bounds: &EnumerationBounds,
) -> Result<(f64, f64), OracleError> {
    let all = enumerate(domain, g, s0, Some(observations), config, bounds)?;
    Ok((all.iter().map(|e| e.joint.prob()).sum(), all.iter().map(|e| e.base.prob()).sum()))
}

/// Normalized likelihood of the observations under `g`; zero when no
/// execution explains them.
pub fn exact_likelihood(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    observations: &[OpId],
    config: &GenerativeConfig,
    bounds: &EnumerationBounds,
) -> Result<f64, OracleError> {
    let (num, den) = likelihood_terms(domain, g, s0, observations, config, bounds)?;
    Ok(if num == 0.0 { 0.0 } else { num / den })
}

/// `max joint(ô) / max joint`, the single-term approximation.
pub fn max_term_ratio(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    observations: &[OpId],
    config: &GenerativeConfig,
    bounds: &EnumerationBounds,
) -> Result<(LogProb, LogProb), OracleError> {
    let all = enumerate(domain, g, s0, Some(observations), config, bounds)?;
    let max = |f: fn(&Enumerated) -> LogProb| all.iter().map(f).max_by(LogProb::total_cmp).unwrap_or(LogProb::ZERO);
    Ok((max(|e| e.joint), max(|e| e.base)))
}

/// Exact posterior over every hypothesis. Insertion follows the instance
/// configuration; hypotheses with zero likelihood are reported infeasible.
pub fn exact_posterior(instance: &PhgrInstance, bounds: &EnumerationBounds) -> Result<PosteriorReport, OracleError> {
    let bounds = if instance.config.insertion { *bounds } else { bounds.without_insertion() };
    let cfg = &instance.config.generative;
    let mut entries = Vec::with_capacity(instance.hypotheses.len());
    for h in &instance.hypotheses {
        let (num, den) = likelihood_terms(&instance.domain, &h.network, &instance.s0, &instance.observations, cfg, &bounds)?;
        let status = if num > 0.0 { HypothesisStatus::Evaluated } else { HypothesisStatus::Infeasible };
        entries.push((status, LogProb::from_prob(num), LogProb::from_prob(den)));
    }
    Ok(posterior(instance, &entries, Estimator::Exact))
}

/// Exact outcome masses of Stage II on a primitive network: the probability
/// of completing every node and of reaching a state where nodes remain but
/// none is executable. The two sum to 1.
pub fn stage_two_outcomes(domain: &Domain, network: &TaskNetwork, s0: &State) -> (f64, f64) {
    fn go(domain: &Domain, net: &TaskNetwork, state: &State, done: &mut BTreeSet<NodeId>, mass: f64, out: &mut (f64, f64)) {
        if done.len() == net.len() {
            out.0 += mass;
            return;
        }
        let available = net.available_set(domain, done, state, &BTreeMap::new());
        if available.is_empty() {
            out.1 += mass;
            return;
        }
        let share = mass / available.len() as f64;
        for node in available {
            let Some(Task::Primitive(op)) = net.label(node) else { unreachable!("primitive network") };
            done.insert(node);
            go(domain, net, &domain.operator(op).apply(state).expect("available"), done, share, out);
            done.remove(&node);
        }
    }
    let mut out = (0.0, 0.0);
    go(domain, network, s0, &mut BTreeSet::new(), 1.0, &mut out);
    out
}

/// Nesting limit of the sampler's decomposition.
pub const SAMPLE_DEPTH_LIMIT: usize = 64;

/// Draws one execution of `g`: methods by their Boltzmann probability,
/// lowest-id compound first, then actions uniformly among the executable
/// ones. Reproducible for a given seed.
pub fn sample_execution(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    config: &GenerativeConfig,
    seed: u64,
) -> Result<Execution, SampleError> {
    sample_execution_with(domain, g, s0, config, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_execution_with<R: Rng>(
    domain: &Domain,
    g: &TaskNetwork,
    s0: &State,
    config: &GenerativeConfig,
    rng: &mut R,
) -> Result<Execution, SampleError> {
    let mut net = g.clone();
    let mut depth: BTreeMap<NodeId, usize> = g.node_ids().map(|n| (n, 0)).collect();
    let mut steps = Vec::new();
    loop {
        let next_compound = net.nodes().find(|(_, t)| matches!(t, Task::Compound(_)));
        let Some((node, Task::Compound(head))) = next_compound else { break };
        let d = depth[&node];
        if d >= SAMPLE_DEPTH_LIMIT {
            return Err(SampleError::TooDeep(SAMPLE_DEPTH_LIMIT));
        }
        let methods = domain.methods_for(head);
        if methods.is_empty() {
            return Err(SampleError::DeadEnd);
        }
        let weights: Vec<f64> = methods.iter().map(|&m| stage_one(domain, m, config.beta)).collect();
        let m = methods[pick_weighted(rng, &weights)];
        let next = net.decompose(node, domain.method(m), domain).expect("head matches");
        depth.remove(&node);
        for id in next.node_ids().filter(|id| id.0 >= net.next_id()) {
            depth.insert(id, d + 1);
        }
        steps.push((node, m));
        net = next;
    }
    let mut state = s0.clone();
    let mut done = BTreeSet::new();
    let mut linearization = Vec::new();
    let none = BTreeMap::new();
    while done.len() < net.len() {
        let available = net.available_set(domain, &done, &state, &none);
        if available.is_empty() {
            return Err(SampleError::DeadEnd);
        }
        let node = available[rng.gen_range(0..available.len())];
        let Some(Task::Primitive(op)) = net.label(node) else { unreachable!("primitive network") };
        state = domain.operator(op).apply(&state).expect("available implies applicable");
        done.insert(node);
        linearization.push(node);
    }
    Ok(Execution {
        root: g.clone(),
        network: net,
        trace: DecompositionTrace { steps },
        linearization,
        inserted: BTreeMap::new(),
    })
}

fn pick_weighted<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generative::{joint_tilde_logprob, ProgressPrior};
    use crate::model::{Method, PrimitiveOperator};

    fn chain() -> (Domain, TaskNetwork) {
        let mut d = Domain::new();
        let p = d.add_atom("p").unwrap();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [p], [])).unwrap();
        let b = d.add_operator(PrimitiveOperator::new("b", [p], [], [])).unwrap();
        let x = d.add_compound("X").unwrap();
        let sub = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[(0, 1)]).unwrap();
        d.add_method(Method::new("m", x, sub)).unwrap();
        (d, TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap())
    }

    fn no_insert() -> EnumerationBounds {
        EnumerationBounds::default().without_insertion()
    }

    #[test]
    fn deterministic_chain_has_one_execution() {
        let (d, g) = chain();
        let all = enumerate_executions(&d, &g, &State::new(), None, &GenerativeConfig::default(), &no_insert()).unwrap();
        assert_eq!(all.len(), 1);
        assert!((all[0].1.prob() - 1.0).abs() < 1e-15);
        assert_eq!(all[0].0.actions(), vec![OpId(0), OpId(1)]);
    }

    #[test]
    fn independent_actions_split_evenly() {
        let mut d = Domain::new();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [], [])).unwrap();
        let b = d.add_operator(PrimitiveOperator::new("b", [], [], [])).unwrap();
        let g = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[]).unwrap();
        let all = enumerate_executions(&d, &g, &State::new(), None, &GenerativeConfig::default(), &no_insert()).unwrap();
        assert_eq!(all.len(), 2);
        for (_, p) in &all {
            assert!((p.prob() - 0.5).abs() < 1e-15);
        }
    }

    /// X → ⟨a⟩ (cost 1) or X → ⟨b, c⟩ unordered, where c deletes b's
    /// precondition: only the order b, c succeeds.
    fn dead_end() -> (Domain, TaskNetwork) {
        let mut d = Domain::new();
        let p = d.add_atom("p").unwrap();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [], [])).unwrap();
        let b = d.add_operator(PrimitiveOperator::new("b", [p], [], [])).unwrap();
        let c = d.add_operator(PrimitiveOperator::new("c", [], [], [p])).unwrap();
        let x = d.add_compound("X").unwrap();
        d.add_method(Method::new("short", x, TaskNetwork::from_parts(&[Task::Primitive(a)], &[]).unwrap())).unwrap();
        let sub = TaskNetwork::from_parts(&[Task::Primitive(b), Task::Primitive(c)], &[]).unwrap();
        d.add_method(Method::new("long", x, sub)).unwrap();
        (d, TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap())
    }

    fn s0(d: &Domain) -> State {
        [d.atom_id("p").unwrap()].into_iter().collect()
    }

    #[test]
    fn dead_ends_lose_mass() {
        let (d, g) = dead_end();
        let cfg = GenerativeConfig::default();
        let all = enumerate_executions(&d, &g, &s0(&d), None, &cfg, &no_insert()).unwrap();
        assert_eq!(all.len(), 2);
        let total: f64 = all.iter().map(|(_, p)| p.prob()).sum();
        // σ(1) + (1 − σ(1)) / 2
        let short = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((total - (short + (1.0 - short) / 2.0)).abs() < 1e-12);
        assert!(total < 1.0);
    }

    #[test]
    fn agrees_with_generative_model() {
        let (d, g) = dead_end();
        let cfg = GenerativeConfig { beta: 0.7, rho: 0.6, progress_prior: ProgressPrior::Uniform };
        let obs = [OpId(1)];
        for (exec, p) in enumerate_executions(&d, &g, &s0(&d), Some(&obs), &cfg, &EnumerationBounds::default()).unwrap() {
            let q = joint_tilde_logprob(&d, Some(&obs), &exec, &s0(&d), &cfg);
            assert!((p.prob() - q.prob()).abs() < 1e-12, "{exec:?}");
        }
    }

    #[test]
    fn unique_plan_full_observation() {
        let (d, g) = chain();
        let obs = [OpId(0), OpId(1)];
        let l = exact_likelihood(&d, &g, &State::new(), &obs, &GenerativeConfig::default(), &no_insert()).unwrap();
        assert!((l - 1.0 / 3.0).abs() < 1e-15);
        let none = exact_likelihood(&d, &g, &State::new(), &[OpId(1), OpId(0)], &GenerativeConfig::default(), &no_insert());
        assert_eq!(none.unwrap(), 0.0);
        let empty = exact_likelihood(&d, &g, &State::new(), &[], &GenerativeConfig::default(), &no_insert()).unwrap();
        assert!((empty - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn insertion_enumerates_extra_actions() {
        let (d, g) = chain();
        let bounds = EnumerationBounds { max_insertions: 1, ..Default::default() };
        let all = enumerate(&d, &g, &State::new(), None, &GenerativeConfig::default(), &bounds).unwrap();
        // Without insertion: a b. One inserted a: before, between, after.
        // One inserted b: only where p holds, i.e. after a (twice).
        assert_eq!(all.len(), 1 + 3 + 2);
        for e in &all {
            e.execution.validate(&d, &State::new()).unwrap();
        }
    }

    #[test]
    fn bounds_are_reported() {
        let mut d = Domain::new();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [], [])).unwrap();
        let x = d.add_compound("X").unwrap();
        let sub = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Compound(x)], &[]).unwrap();
        d.add_method(Method::new("rec", x, sub)).unwrap();
        d.add_method(Method::new("stop", x, TaskNetwork::new())).unwrap();
        let g = TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap();
        let err = enumerate(&d, &g, &State::new(), None, &GenerativeConfig::default(), &no_insert()).unwrap_err();
        assert!(matches!(err, OracleError::BoundExceeded { .. }));
        let small = EnumerationBounds { max_executions: 1, ..no_insert() };
        let two = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(a)], &[]).unwrap();
        let err = enumerate(&d, &two, &State::new(), None, &GenerativeConfig::default(), &small).unwrap_err();
        assert_eq!(err, OracleError::BoundExceeded { bound: "executions", limit: 1 });
    }

    #[test]
    fn stage_two_masses_sum_to_one() {
        let (d, _) = dead_end();
        let long = d.method(d.method_id("long").unwrap()).subnetwork.clone();
        let (ok, dead) = stage_two_outcomes(&d, &long, &s0(&d));
        assert!((ok - 0.5).abs() < 1e-15 && (dead - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampler_is_reproducible_and_matches_enumeration() {
        let (d, g) = chain();
        let cfg = GenerativeConfig::default();
        let only = enumerate(&d, &g, &State::new(), None, &cfg, &no_insert()).unwrap().remove(0).execution;
        for seed in 0..5 {
            assert_eq!(sample_execution(&d, &g, &State::new(), &cfg, seed).unwrap(), only);
        }
        let (d, g) = dead_end();
        let a = sample_execution(&d, &g, &s0(&d), &cfg, 11);
        assert_eq!(a, sample_execution(&d, &g, &s0(&d), &cfg, 11));
    }

    #[test]
    fn sampler_success_rate_matches_enumerated_mass() {
        let (d, g) = dead_end();
        let cfg = GenerativeConfig::default();
        let mass: f64 = enumerate(&d, &g, &s0(&d), None, &cfg, &no_insert()).unwrap().iter().map(|e| e.base.prob()).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let ok = (0..n).filter(|_| sample_execution_with(&d, &g, &s0(&d), &cfg, &mut rng).is_ok()).count();
        let sigma = (mass * (1.0 - mass) / n as f64).sqrt();
        assert!((ok as f64 / n as f64 - mass).abs() <= 3.0 * sigma);
    }
}
