use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use super::domain::{CompoundId, Domain, Method, OpId};
use super::state::State;
use crate::error::ModelError;

/// Node identifier within a task network (and its decompositions).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Ids at or above this value belong to inserted (exogenous) actions, which
/// never enter a network's own id space.
pub const INSERTED_ID_BASE: u32 = 1 << 31;

impl NodeId {
    pub fn inserted(index: usize) -> NodeId {
        NodeId(INSERTED_ID_BASE + index as u32)
    }

    pub fn is_inserted(self) -> bool {
        self.0 >= INSERTED_ID_BASE
    }
}

/// A task symbol: primitive action or compound task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Primitive(OpId),
    Compound(CompoundId),
}

impl Task {
    pub fn is_primitive(self) -> bool {
        matches!(self, Task::Primitive(_))
    }
}

type Closure = BTreeMap<NodeId, BTreeSet<NodeId>>;

/// Partially ordered, labeled set of task nodes.
///
/// The order is stored as direct edges; the strict partial order is their
/// transitive closure, computed lazily and cached until the next mutation.
/// Fresh node ids come from a per-network counter that never reuses ids, so
/// replaying the same decompositions always reproduces the same ids.
#[derive(Clone, Debug, Default)]
pub struct TaskNetwork {
    nodes: BTreeMap<NodeId, Task>,
    edges: BTreeSet<(NodeId, NodeId)>,
    next_id: u32,
    closure: OnceLock<Arc<Closure>>,
}

impl PartialEq for TaskNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.next_id == other.next_id
    }
}

impl TaskNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a network whose nodes get ids `0..labels.len()`; `order` pairs
    /// index into `labels`.
    pub fn from_parts(labels: &[Task], order: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut net = TaskNetwork::new();
        let ids: Vec<NodeId> = labels.iter().map(|t| net.add_node(*t)).collect();
        for &(a, b) in order {
            let (Some(&a), Some(&b)) = (ids.get(a), ids.get(b)) else {
                return Err(ModelError::UnknownNode(a.max(b) as u32));
            };
            net.add_edge(a, b)?;
        }
        Ok(net)
    }

    pub fn add_node(&mut self, task: Task) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(id, task);
        self.invalidate();
        id
    }

    /// Adds the constraint `before ≺ after`, rejecting self-loops and cycles.
    pub fn add_edge(&mut self, before: NodeId, after: NodeId) -> Result<(), ModelError> {
        for n in [before, after] {
            if !self.nodes.contains_key(&n) {
                return Err(ModelError::UnknownNode(n.0));
            }
        }
        if before == after || self.precedes(after, before) {
            return Err(ModelError::CyclicOrder(before.0, after.0));
        }
        if self.edges.insert((before, after)) {
            self.invalidate();
        }
        Ok(())
    }

    /// Removes a node and every edge touching it. Order through the node is
    /// not bridged.
    pub fn remove_node(&mut self, node: NodeId) -> Option<Task> {
        let task = self.nodes.remove(&node)?;
        self.edges.retain(|&(a, b)| a != node && b != node);
        self.invalidate();
        Some(task)
    }

    pub fn relabel(&mut self, node: NodeId, task: Task) -> Result<(), ModelError> {
        match self.nodes.get_mut(&node) {
            Some(slot) => {
                *slot = task;
                Ok(())
            }
            None => Err(ModelError::UnknownNode(node.0)),
        }
    }

    fn invalidate(&mut self) {
        self.closure = OnceLock::new();
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains_key(&node)
    }

    pub fn label(&self, node: NodeId) -> Option<Task> {
        self.nodes.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Task)> + '_ {
        self.nodes.iter().map(|(id, t)| (*id, *t))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The id the next added node will receive.
    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn is_primitive(&self) -> bool {
        self.nodes.values().all(|t| t.is_primitive())
    }

    /// Direct predecessors of `node`.
    pub fn direct_predecessors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.iter().filter(move |e| e.1 == node).map(|e| e.0)
    }

    fn closure(&self) -> &Closure {
        self.closure.get_or_init(|| {
            let mut preds: Closure = self.nodes.keys().map(|n| (*n, BTreeSet::new())).collect();
            for &(a, b) in &self.edges {
                preds.get_mut(&b).expect("edge endpoint").insert(a);
            }
            // Repeated relaxation; networks here are small.
            loop {
                let mut changed = false;
                let keys: Vec<NodeId> = preds.keys().copied().collect();
                for n in keys {
                    let direct: Vec<NodeId> = preds[&n].iter().copied().collect();
                    let mut grown = preds[&n].clone();
                    for p in direct {
                        grown.extend(preds[&p].iter().copied());
                    }
                    if grown.len() != preds[&n].len() {
                        preds.insert(n, grown);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            Arc::new(preds)
        })
    }

    /// All transitive predecessors of `node`.
    pub fn predecessors(&self, node: NodeId) -> Option<&BTreeSet<NodeId>> {
        self.closure().get(&node)
    }

    /// `a ≺ b` in the transitive closure.
    pub fn precedes(&self, a: NodeId, b: NodeId) -> bool {
        self.closure().get(&b).is_some_and(|p| p.contains(&a))
    }

    pub fn is_acyclic(&self) -> bool {
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.keys().map(|n| (*n, 0)).collect();
        for &(_, b) in &self.edges {
            *indegree.get_mut(&b).expect("edge endpoint") += 1;
        }
        let mut ready: Vec<NodeId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for &(a, b) in &self.edges {
                if a == n {
                    let d = indegree.get_mut(&b).expect("edge endpoint");
                    *d -= 1;
                    if *d == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        seen == self.nodes.len()
    }

    /// Replaces `node` by a fresh copy of `method`'s subnetwork. Every edge
    /// into `node` is redirected to all copied nodes, likewise every edge out
    /// of it. An empty subnetwork simply drops the node: its predecessors and
    /// successors do not become ordered with each other.
    pub fn decompose(&self, node: NodeId, method: &Method, domain: &Domain) -> Result<TaskNetwork, ModelError> {
        let label = self.nodes.get(&node).ok_or(ModelError::UnknownNode(node.0))?;
        if *label != Task::Compound(method.head) {
            return Err(ModelError::MethodNotApplicable {
                method: method.name.clone(),
                head: domain.compound_name(method.head).to_string(),
                node: node.0,
            });
        }
        let mut next = self.clone();
        next.nodes.remove(&node);
        let mut copy = BTreeMap::new();
        for (sub_id, task) in method.subnetwork.nodes() {
            let fresh = NodeId(next.next_id);
            next.next_id += 1;
            next.nodes.insert(fresh, task);
            copy.insert(sub_id, fresh);
        }
        let mut edges = BTreeSet::new();
        for &(a, b) in &self.edges {
            match (a == node, b == node) {
                (false, false) => {
                    edges.insert((a, b));
                }
                (false, true) => edges.extend(copy.values().map(|y| (a, *y))),
                (true, false) => edges.extend(copy.values().map(|y| (*y, b))),
                (true, true) => unreachable!("self-loop in task network"),
            }
        }
        for (a, b) in method.subnetwork.edges() {
            edges.insert((copy[&a], copy[&b]));
        }
        next.edges = edges;
        next.invalidate();
        Ok(next)
    }

    /// Executable nodes at one step of the linearization process: unexecuted
    /// network nodes with no unexecuted predecessor whose operator applies in
    /// `state`, plus unexecuted inserted actions that apply in `state`.
    pub fn available_set(
        &self,
        domain: &Domain,
        done: &BTreeSet<NodeId>,
        state: &State,
        inserted: &BTreeMap<NodeId, OpId>,
    ) -> Vec<NodeId> {
        let mut available = Vec::new();
        for (id, task) in self.nodes() {
            if done.contains(&id) {
                continue;
            }
            let Task::Primitive(op) = task else { continue };
            let blocked = self.predecessors(id).is_some_and(|p| p.iter().any(|q| !done.contains(q)));
            if !blocked && domain.operator(op).is_applicable(state) {
                available.push(id);
            }
        }
        for (&id, &op) in inserted {
            if !done.contains(&id) && domain.operator(op).is_applicable(state) {
                available.push(id);
            }
        }
        available
    }

    /// Streams the executable linearizations of a primitive network from `s0`
    /// in lexicographic node-id order.
    pub fn linearizations<'a>(&'a self, domain: &'a Domain, s0: &State) -> Linearizations<'a> {
        Linearizations::new(self, domain, s0.clone())
    }
}

/// Depth-first enumerator behind [`TaskNetwork::linearizations`].
pub struct Linearizations<'a> {
    net: &'a TaskNetwork,
    domain: &'a Domain,
    no_inserted: BTreeMap<NodeId, OpId>,
    // Each frame: the state before the choice, its candidates, next index.
    stack: Vec<(State, Vec<NodeId>, usize)>,
    path: Vec<NodeId>,
    done: BTreeSet<NodeId>,
    exhausted: bool,
}

impl<'a> Linearizations<'a> {
    fn new(net: &'a TaskNetwork, domain: &'a Domain, s0: State) -> Self {
        let mut it = Linearizations {
            net,
            domain,
            no_inserted: BTreeMap::new(),
            stack: Vec::new(),
            path: Vec::new(),
            done: BTreeSet::new(),
            exhausted: !net.is_primitive(),
        };
        if !it.exhausted {
            let cands = net.available_set(domain, &it.done, &s0, &it.no_inserted);
            it.stack.push((s0, cands, 0));
        }
        it
    }

    fn op_of(&self, node: NodeId) -> OpId {
        match self.net.label(node) {
            Some(Task::Primitive(op)) => op,
            _ => unreachable!("linearizing a non-primitive node"),
        }
    }
}

impl Iterator for Linearizations<'_> {
    type Item = Vec<NodeId>;

    fn next(&mut self) -> Option<Vec<NodeId>> {
        if self.exhausted {
            return None;
        }
        if self.net.is_empty() {
            self.exhausted = true;
            return Some(Vec::new());
        }
        loop {
            let Some(frame) = self.stack.last_mut() else {
                self.exhausted = true;
                return None;
            };
            if frame.2 >= frame.1.len() {
                self.stack.pop();
                if let Some(last) = self.path.pop() {
                    self.done.remove(&last);
                }
                continue;
            }
            let node = frame.1[frame.2];
            frame.2 += 1;
            let state = frame.0.clone();
            let next_state = self.domain.operator(self.op_of(node)).apply_unchecked(&state);
            self.path.push(node);
            self.done.insert(node);
            if self.path.len() == self.net.len() {
                let out = self.path.clone();
                self.path.pop();
                self.done.remove(&node);
                return Some(out);
            }
            let cands = self.net.available_set(self.domain, &self.done, &next_state, &self.no_inserted);
            self.stack.push((next_state, cands, 0));
        }
    }
}
