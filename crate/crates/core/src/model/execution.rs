use std::collections::{BTreeMap, BTreeSet};

use super::domain::{Domain, MethodId, OpId};
use super::network::{NodeId, Task, TaskNetwork};
use super::state::State;
use crate::error::ModelError;

/// Applied decompositions, in application order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecompositionTrace {
    pub steps: Vec<(NodeId, MethodId)>,
}

impl DecompositionTrace {
    pub fn methods(&self) -> impl Iterator<Item = MethodId> + '_ {
        self.steps.iter().map(|s| s.1)
    }

    /// Replays the steps from `root`.
    pub fn replay(&self, root: &TaskNetwork, domain: &Domain) -> Result<TaskNetwork, ModelError> {
        let mut net = root.clone();
        for &(node, method) in &self.steps {
            net = net.decompose(node, domain.method(method), domain)?;
        }
        Ok(net)
    }
}

/// A decomposed primitive network together with an executed linearization.
///
/// `root` is the network the trace starts from. `inserted` holds the
/// exogenous actions interleaved into the linearization; their ids are
/// outside the network's id space (see [`NodeId::inserted`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub root: TaskNetwork,
    pub network: TaskNetwork,
    pub trace: DecompositionTrace,
    pub linearization: Vec<NodeId>,
    pub inserted: BTreeMap<NodeId, OpId>,
}

impl Execution {
    pub fn op_of(&self, node: NodeId) -> Option<OpId> {
        if let Some(op) = self.inserted.get(&node) {
            return Some(*op);
        }
        match self.network.label(node)? {
            Task::Primitive(op) => Some(op),
            Task::Compound(_) => None,
        }
    }

    /// The action sequence π.
    pub fn actions(&self) -> Vec<OpId> {
        self.linearization.iter().map(|n| self.op_of(*n).expect("linearized node has an operator")).collect()
    }

    /// Sum of operator costs, inserted actions weighted by `insertion_penalty`.
    pub fn cost(&self, domain: &Domain, insertion_penalty: f64) -> f64 {
        self.linearization
            .iter()
            .map(|n| {
                let c = domain.operator(self.op_of(*n).expect("linearized node has an operator")).cost;
                if n.is_inserted() {
                    c * insertion_penalty
                } else {
                    c
                }
            })
            .sum()
    }

    /// Checks every structural invariant: the trace replays to `network`, the
    /// network is primitive, the linearization is a permutation of network
    /// and inserted nodes that respects the order, and the actions execute
    /// from `s0`.
    pub fn validate(&self, domain: &Domain, s0: &State) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidExecution(msg));
        let replayed = self.trace.replay(&self.root, domain)?;
        if replayed.nodes().ne(self.network.nodes()) || replayed.edges().ne(self.network.edges()) {
            return bad("decomposition trace does not reproduce the network".into());
        }
        if !self.network.is_primitive() {
            return bad("network is not primitive".into());
        }
        if self.inserted.keys().any(|n| !n.is_inserted()) {
            return bad("inserted node uses a network id".into());
        }
        let expected: BTreeSet<NodeId> = self.network.node_ids().chain(self.inserted.keys().copied()).collect();
        let seen: BTreeSet<NodeId> = self.linearization.iter().copied().collect();
        if seen.len() != self.linearization.len() || seen != expected {
            return bad("linearization is not a permutation of the execution's nodes".into());
        }
        let mut done = BTreeSet::new();
        let mut state = s0.clone();
        for &node in &self.linearization {
            if !node.is_inserted() {
                let preds = self.network.predecessors(node).expect("node in network");
                if preds.iter().any(|p| !done.contains(p)) {
                    return bad(format!("node {} runs before a predecessor", node.0));
                }
            }
            let op = domain.operator(self.op_of(node).expect("checked above"));
            state = op.apply(&state)?;
            done.insert(node);
        }
        Ok(())
    }

    /// Returns a copy with one more inserted action at `position` in the
    /// linearization.
    pub fn with_inserted_action(&self, position: usize, op: OpId) -> Execution {
        let mut next = self.clone();
        let id = NodeId::inserted(self.inserted.len());
        debug_assert!(!next.inserted.contains_key(&id));
        next.inserted.insert(id, op);
        next.linearization.insert(position.min(next.linearization.len()), id);
        next
    }
}
