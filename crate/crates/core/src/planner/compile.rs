use std::collections::BTreeMap;

use super::search::Solution;
use crate::model::{AtomId, CompoundId, Domain, Method, MethodId, NodeId, OpId, PrimitiveOperator, State, Task, TaskNetwork};

/// How the compiled instance must place the observations in a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMode {
    /// Observations appear in order, possibly with unobserved actions between.
    Subsequence,
    /// Observations are exactly the first actions of the plan. Original
    /// operators additionally require the last bookkeeping atom.
    Prefix,
}

/// A domain extended so that every plan executing the sentinel embeds the
/// observation sequence.
///
/// For observation `i` (1-based) a copy of its operator is added with
/// precondition `obs_{i-1}`, adding `obs_i` and deleting `obs_{i-1}`; `obs_0`
/// holds initially. Copies are registered as variants of the original symbol,
/// so method subnetworks need no relabeling. The sentinel requires `obs_m`,
/// has no effects, costs 0 and is never inserted.
#[derive(Clone, Debug)]
pub struct CompiledInstance {
    pub domain: Domain,
    pub sentinel: OpId,
    pub observations: Vec<OpId>,
    pub mode: EmbeddingMode,
    decode: BTreeMap<OpId, OpId>,
    obs_atoms: Vec<AtomId>,
}

fn fresh_name(taken: impl Fn(&str) -> bool, base: String) -> String {
    let mut name = base;
    while taken(&name) {
        name.push('\'');
    }
    name
}

pub fn compile_observations(domain: &Domain, observations: &[OpId], mode: EmbeddingMode) -> CompiledInstance {
    let mut compiled = domain.clone();
    let obs_atoms: Vec<AtomId> = (0..=observations.len())
        .map(|i| {
            let name = fresh_name(|n| compiled.atom_id(n).is_some(), format!("obs#{i}"));
            compiled.add_atom(name).expect("fresh atom name")
        })
        .collect();
    let last = *obs_atoms.last().expect("obs_0 always exists");

    let mut decode = BTreeMap::new();
    for (i, &original) in observations.iter().enumerate() {
        let base = domain.operator(original);
        let name = fresh_name(|n| compiled.task(n).is_some(), format!("{}#obs{}", base.name, i + 1));
        let copy = PrimitiveOperator::new(
            name,
            base.pre.iter().copied().chain([obs_atoms[i]]),
            base.add.iter().copied().chain([obs_atoms[i + 1]]),
            base.del.iter().copied().chain([obs_atoms[i]]),
        )
        .with_cost(base.cost);
        let id = compiled.add_operator(copy).expect("fresh operator name");
        compiled.add_variant(original, id);
        decode.insert(id, original);
    }
    if mode == EmbeddingMode::Prefix {
        for (id, _) in domain.operators() {
            compiled.require(id, last);
        }
    }
    let sentinel_name = fresh_name(|n| compiled.task(n).is_some(), "#sentinel".to_string());
    let sentinel = compiled
        .add_operator(PrimitiveOperator::new(sentinel_name, [last], [], []).with_cost(0.0))
        .expect("fresh operator name");
    compiled.reserve(sentinel);
    CompiledInstance { domain: compiled, sentinel, observations: observations.to_vec(), mode, decode, obs_atoms }
}

impl CompiledInstance {
    /// `s0 ∪ {obs_0}`.
    pub fn initial_state(&self, s0: &State) -> State {
        let mut s = s0.clone();
        s.insert(self.obs_atoms[0]);
        s
    }

    pub fn bookkeeping_atoms(&self) -> &[AtomId] {
        &self.obs_atoms
    }

    /// Original symbol of a compiled operator; `None` for the sentinel.
    pub fn decode_op(&self, op: OpId) -> Option<OpId> {
        if op == self.sentinel {
            None
        } else {
            Some(self.decode.get(&op).copied().unwrap_or(op))
        }
    }

    /// `g` plus a sentinel node ordered after every node of `g`.
    pub fn attach_hypothesis(&self, goal: &TaskNetwork) -> TaskNetwork {
        let mut net = goal.clone();
        let existing: Vec<NodeId> = net.node_ids().collect();
        let sentinel = net.add_node(Task::Primitive(self.sentinel));
        for n in existing {
            net.add_edge(n, sentinel).expect("sentinel is a fresh sink");
        }
        net
    }

    /// Adds a fresh root compound with one method per hypothesis; the
    /// initial network is a single node labeled with that compound.
    pub fn build_dummy_root(&self, hypotheses: &[TaskNetwork]) -> DummyRoot {
        let mut domain = self.domain.clone();
        let root_name = fresh_name(|n| domain.task(n).is_some(), "#root".to_string());
        let root = domain.add_compound(root_name).expect("fresh compound");
        let methods = hypotheses
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let name = fresh_name(|n| domain.method_id(n).is_some(), format!("#root-{i}"));
                domain.add_method(Method::new(name, root, self.attach_hypothesis(g))).expect("valid root method")
            })
            .collect();
        let network = TaskNetwork::from_parts(&[Task::Compound(root)], &[]).expect("single node");
        DummyRoot { domain, network, root, methods }
    }
}

/// Maps a solution of the compiled instance back onto the original domain:
/// copies become their originals and the sentinel node disappears.
pub fn decode_solution(solution: &Solution, compiled: &CompiledInstance) -> Solution {
    let mut exec = solution.execution.clone();
    let sentinels = |net: &TaskNetwork| -> Vec<NodeId> {
        net.nodes().filter(|(_, t)| *t == Task::Primitive(compiled.sentinel)).map(|(n, _)| n).collect()
    };
    for n in sentinels(&exec.root) {
        exec.root.remove_node(n);
    }
    let removed = sentinels(&exec.network);
    for n in &removed {
        exec.network.remove_node(*n);
    }
    exec.linearization.retain(|n| !removed.contains(n));
    let relabel: Vec<(NodeId, OpId)> = exec
        .network
        .nodes()
        .filter_map(|(n, t)| match t {
            Task::Primitive(op) => Some((n, compiled.decode_op(op)?)),
            Task::Compound(_) => None,
        })
        .collect();
    for (n, op) in relabel {
        exec.network.relabel(n, Task::Primitive(op)).expect("node exists");
    }
    for op in exec.inserted.values_mut() {
        *op = compiled.decode_op(*op).expect("the sentinel is never inserted");
    }
    Solution { execution: exec, total_cost: solution.total_cost, root_method: solution.root_method }
}

/// Dummy-root instance over a compiled domain: one root method per hypothesis.
#[derive(Clone, Debug)]
pub struct DummyRoot {
    pub domain: Domain,
    pub network: TaskNetwork,
    pub root: CompoundId,
    methods: Vec<MethodId>,
}

impl DummyRoot {
    pub fn root_method(&self, hypothesis: usize) -> MethodId {
        self.methods[hypothesis]
    }

    pub fn hypothesis_of(&self, method: MethodId) -> Option<usize> {
        self.methods.iter().position(|m| *m == method)
    }

    /// Stops offering the root method of `hypothesis`.
    pub fn remove_hypothesis(&mut self, hypothesis: usize) {
        self.domain.remove_method(self.methods[hypothesis]);
    }

    pub fn remaining(&self) -> usize {
        self.domain.methods_for(self.root).len()
    }

    /// Splits a dummy-root solution into its hypothesis and a decoded
    /// solution whose execution starts from that hypothesis' network. The
    /// root method is recorded in `root_method` and left out of the trace.
    pub fn split(&self, solution: &Solution, compiled: &CompiledInstance) -> Option<(usize, Solution)> {
        let &(root_node, method) = solution.execution.trace.steps.first()?;
        let hypothesis = self.hypothesis_of(method)?;
        let mut stripped = solution.clone();
        stripped.execution.root =
            solution.execution.root.decompose(root_node, self.domain.method(method), &self.domain).ok()?;
        stripped.execution.trace.steps.remove(0);
        stripped.root_method = Some(method);
        Some((hypothesis, decode_solution(&stripped, compiled)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{plan, plan_with_insertion, PlanError, PlannerLimits};

    fn domain() -> (Domain, OpId, OpId, CompoundId) {
        let mut d = Domain::new();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [], [])).unwrap();
        let b = d.add_operator(PrimitiveOperator::new("b", [], [], [])).unwrap();
        let x = d.add_compound("X").unwrap();
        let sub = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[(0, 1)]).unwrap();
        d.add_method(Method::new("m", x, sub)).unwrap();
        (d, a, b, x)
    }

    #[test]
    fn empty_observations_add_only_the_sentinel() {
        let (d, ..) = domain();
        let c = compile_observations(&d, &[], EmbeddingMode::Subsequence);
        assert_eq!(c.domain.operator_count(), d.operator_count() + 1);
        assert_eq!(c.domain.operator(c.sentinel).pre, vec![c.bookkeeping_atoms()[0]]);
        assert!(c.domain.operator(c.sentinel).is_applicable(&c.initial_state(&State::new())));
    }

    #[test]
    fn single_observation_copy() {
        let (d, a, ..) = domain();
        let c = compile_observations(&d, &[a], EmbeddingMode::Subsequence);
        let obs = c.bookkeeping_atoms();
        let copy = c.domain.variants(a)[0];
        let op = c.domain.operator(copy);
        assert_eq!(op.pre, vec![obs[0]]);
        assert_eq!(op.add, vec![obs[1]]);
        assert_eq!(op.del, vec![obs[0]]);
        assert_eq!(c.domain.operator(c.sentinel).pre, vec![obs[1]]);
        assert_eq!(c.decode_op(copy), Some(a));
        assert_eq!(c.decode_op(c.sentinel), None);
    }

    #[test]
    fn repeated_observation_gets_chained_copies() {
        let (d, a, ..) = domain();
        let c = compile_observations(&d, &[a, a], EmbeddingMode::Subsequence);
        let obs = c.bookkeeping_atoms();
        let copies = c.domain.variants(a);
        assert_eq!(copies.len(), 2);
        assert_ne!(copies[0], copies[1]);
        assert_eq!(c.domain.operator(copies[0]).add, vec![obs[1]]);
        assert_eq!(c.domain.operator(copies[1]).pre, vec![obs[1]]);
        assert_eq!(c.domain.operator(copies[1]).add, vec![obs[2]]);
    }

    #[test]
    fn attach_orders_sentinel_last() {
        let (d, a, b, _) = domain();
        let c = compile_observations(&d, &[], EmbeddingMode::Subsequence);
        let g = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[]).unwrap();
        let net = c.attach_hypothesis(&g);
        assert_eq!(net.len(), 3);
        assert!(net.precedes(NodeId(0), NodeId(2)) && net.precedes(NodeId(1), NodeId(2)));
        let empty = c.attach_hypothesis(&TaskNetwork::new());
        let sol = plan(&c.domain, &c.initial_state(&State::new()), &empty, &PlannerLimits::default()).unwrap();
        assert_eq!(decode_solution(&sol, &c).execution.linearization, Vec::<NodeId>::new());
    }

    #[test]
    fn decoded_plan_embeds_observations() {
        let (d, a, b, x) = domain();
        let g = TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap();
        for obs in [vec![], vec![a], vec![b], vec![a, b]] {
            let c = compile_observations(&d, &obs, EmbeddingMode::Subsequence);
            let sol = plan(&c.domain, &c.initial_state(&State::new()), &c.attach_hypothesis(&g), &PlannerLimits::default())
                .unwrap();
            let decoded = decode_solution(&sol, &c);
            decoded.execution.validate(&d, &State::new()).unwrap();
            assert_eq!(decoded.execution.actions(), vec![a, b]);
            assert!(decoded.execution.root.nodes().eq(g.nodes()));
        }
        let c = compile_observations(&d, &[b, a], EmbeddingMode::Subsequence);
        let res = plan(&c.domain, &c.initial_state(&State::new()), &c.attach_hypothesis(&g), &PlannerLimits::default());
        assert_eq!(res, Err(PlanError::Unsolvable));
    }

    #[test]
    fn exogenous_observation_needs_insertion() {
        let (mut d, a, _, x) = domain();
        let z = d.add_operator(PrimitiveOperator::new("z", [], [], [])).unwrap();
        let g = TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap();
        let c = compile_observations(&d, &[a, z], EmbeddingMode::Subsequence);
        let (s0, n0) = (c.initial_state(&State::new()), c.attach_hypothesis(&g));
        assert_eq!(plan(&c.domain, &s0, &n0, &PlannerLimits::default()), Err(PlanError::Unsolvable));
        let sol = plan_with_insertion(&c.domain, &s0, &n0, &PlannerLimits::default()).unwrap();
        let decoded = decode_solution(&sol, &c);
        decoded.execution.validate(&d, &State::new()).unwrap();
        assert_eq!(decoded.execution.inserted.values().copied().collect::<Vec<_>>(), vec![z]);
        assert_eq!(crate::generative::embedding_count(&[a, z], &decoded.execution.actions()), 1);
    }

    #[test]
    fn prefix_mode_forces_observations_first() {
        let mut d = Domain::new();
        let a = d.add_operator(PrimitiveOperator::new("a", [], [], [])).unwrap();
        let b = d.add_operator(PrimitiveOperator::new("b", [], [], [])).unwrap();
        let g = TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[]).unwrap();
        let c = compile_observations(&d, &[b], EmbeddingMode::Prefix);
        let sol = plan(&c.domain, &c.initial_state(&State::new()), &c.attach_hypothesis(&g), &PlannerLimits::default())
            .unwrap();
        assert_eq!(decode_solution(&sol, &c).execution.actions(), vec![b, a]);
        // Subsequence mode is free to keep the lexicographic order.
        let c = compile_observations(&d, &[b], EmbeddingMode::Subsequence);
        let sol = plan(&c.domain, &c.initial_state(&State::new()), &c.attach_hypothesis(&g), &PlannerLimits::default())
            .unwrap();
        assert_eq!(decode_solution(&sol, &c).execution.actions(), vec![a, b]);
    }

    #[test]
    fn dummy_root_selection_and_removal() {
        let (d, a, b, x) = domain();
        let c = compile_observations(&d, &[], EmbeddingMode::Subsequence);
        let goals = vec![
            TaskNetwork::from_parts(&[Task::Compound(x)], &[]).unwrap(),
            TaskNetwork::from_parts(&[Task::Primitive(b)], &[]).unwrap(),
            TaskNetwork::from_parts(&[Task::Primitive(a), Task::Primitive(b)], &[(0, 1)]).unwrap(),
        ];
        let mut dr = c.build_dummy_root(&goals);
        assert_eq!(dr.remaining(), 3);
        let s0 = c.initial_state(&State::new());
        let sol = plan(&dr.domain, &s0, &dr.network, &PlannerLimits::default()).unwrap();
        let (h, decoded) = dr.split(&sol, &c).unwrap();
        assert_eq!(h, 1);
        assert_eq!(decoded.root_method, Some(dr.root_method(1)));
        let labels: Vec<Task> = decoded.execution.root.nodes().map(|(_, t)| t).collect();
        assert_eq!(labels, vec![Task::Primitive(b)]);
        decoded.execution.validate(&d, &State::new()).unwrap();
        dr.remove_hypothesis(1);
        let sol = plan(&dr.domain, &s0, &dr.network, &PlannerLimits::default()).unwrap();
        assert_ne!(dr.split(&sol, &c).unwrap().0, 1);
        let empty = c.build_dummy_root(&[]);
        assert_eq!(plan(&empty.domain, &s0, &empty.network, &PlannerLimits::default()), Err(PlanError::Unsolvable));
    }
}
