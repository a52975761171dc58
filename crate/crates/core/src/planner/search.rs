use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::generative::{joint_tilde_logprob, GenerativeConfig};
use crate::model::{Domain, Execution, DecompositionTrace, MethodId, NodeId, OpId, State, Task, TaskNetwork};
use crate::prob::LogProb;

/// Objective of a planner call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Uniform-cost search; returns a cheapest solution.
    MinCost,
    /// Complete enumeration; returns the solution with the highest score
    /// (by default the Stage I × Stage II joint). Only for small instances.
    ExhaustiveMaxProbability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerLimits {
    /// Maximum number of search-node expansions.
    pub node_limit: usize,
    /// Wall-clock limit. `None` keeps results independent of machine speed.
    pub time_limit: Option<Duration>,
    /// Maximum number of inserted actions when insertion is enabled.
    pub insertion_limit: usize,
    /// Cost multiplier applied to inserted actions.
    pub insertion_penalty: f64,
    pub mode: SearchMode,
}

impl Default for PlannerLimits {
    fn default() -> Self {
        PlannerLimits {
            node_limit: 500_000,
            time_limit: None,
            insertion_limit: 2,
            insertion_penalty: 1.0,
            mode: SearchMode::MinCost,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub execution: Execution,
    pub total_cost: f64,
    /// Set when the solution came from a dummy-root instance.
    pub root_method: Option<MethodId>,
}

impl Solution {
    pub fn insertions(&self) -> usize {
        self.execution.inserted.len()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PlanError {
    /// The bounded search space was exhausted without a solution.
    #[error("no solution exists within the search bounds")]
    Unsolvable,
    /// A node or time limit stopped the search; a solution may still exist.
    #[error("search stopped after {expansions} expansions: {reason}")]
    ResourceExhausted { expansions: usize, reason: String },
}

/// Scores complete solutions in exhaustive mode (natural-log scale).
pub type Scorer<'a> = dyn Fn(&Solution) -> LogProb + 'a;

/// Progression-search HTN planner.
///
/// Search nodes hold the full network decomposed so far plus the set of
/// executed nodes. A node with an unexecuted, unconstrained compound task is
/// expanded only by decomposing the lowest-id such task (decompositions
/// commute with execution, so this loses no solutions); otherwise every
/// unconstrained applicable primitive may be executed, by its own operator or
/// by one of its variants, and when insertion is on any insertable applicable
/// operator may be inserted.
pub struct Planner<'a> {
    domain: &'a Domain,
    limits: PlannerLimits,
    insertion: bool,
    scorer: Option<Box<Scorer<'a>>>,
}

impl<'a> Planner<'a> {
    pub fn new(domain: &'a Domain, limits: PlannerLimits) -> Self {
        Planner { domain, limits, insertion: false, scorer: None }
    }

    pub fn with_insertion(mut self, enabled: bool) -> Self {
        self.insertion = enabled;
        self
    }

    /// Replaces the exhaustive-mode objective.
    pub fn with_scorer(mut self, scorer: impl Fn(&Solution) -> LogProb + 'a) -> Self {
        self.scorer = Some(Box::new(scorer));
        self
    }

    fn insertion_limit(&self) -> usize {
        if self.insertion {
            self.limits.insertion_limit
        } else {
            0
        }
    }

    pub fn plan(&self, s0: &State, n0: &TaskNetwork) -> Result<Solution, PlanError> {
        let root = SearchNode {
            state: s0.clone(),
            net: n0.clone(),
            done: BTreeSet::new(),
            lin: Vec::new(),
            trace: Vec::new(),
            inserted: BTreeMap::new(),
            cost: 0.0,
        };
        let mut search = Search {
            planner: self,
            root: n0,
            expansions: 0,
            started: Instant::now(),
            pool: if self.insertion { self.domain.insertable_operators() } else { Vec::new() },
        };
        match self.limits.mode {
            SearchMode::MinCost => search.min_cost(root),
            SearchMode::ExhaustiveMaxProbability => {
                let default_scorer;
                let scorer: &Scorer = match &self.scorer {
                    Some(s) => s.as_ref(),
                    None => {
                        let cfg = GenerativeConfig::default();
                        default_scorer = move |sol: &Solution| {
                            joint_tilde_logprob(self.domain, None, &sol.execution, s0, &cfg)
                        };
                        &default_scorer
                    }
                };
                search.exhaustive(root, scorer)
            }
        }
    }
}

/// Min-cost plan without task insertion.
pub fn plan(domain: &Domain, s0: &State, n0: &TaskNetwork, limits: &PlannerLimits) -> Result<Solution, PlanError> {
    Planner::new(domain, limits.clone()).plan(s0, n0)
}

/// Like [`plan`], but up to `limits.insertion_limit` extra actions may be
/// interleaved, each costing its operator cost times the insertion penalty.
pub fn plan_with_insertion(
    domain: &Domain,
    s0: &State,
    n0: &TaskNetwork,
    limits: &PlannerLimits,
) -> Result<Solution, PlanError> {
    Planner::new(domain, limits.clone()).with_insertion(true).plan(s0, n0)
}

#[derive(Clone)]
struct SearchNode {
    state: State,
    net: TaskNetwork,
    done: BTreeSet<NodeId>,
    lin: Vec<NodeId>,
    trace: Vec<(NodeId, MethodId)>,
    inserted: BTreeMap<NodeId, OpId>,
    cost: f64,
}

impl SearchNode {
    fn is_goal(&self) -> bool {
        self.net.node_ids().all(|n| self.done.contains(&n))
    }

    /// Unexecuted nodes with no unexecuted direct predecessor.
    fn unconstrained(&self) -> Vec<NodeId> {
        let blocked: BTreeSet<NodeId> = self
            .net
            .edges()
            .filter(|(a, b)| !self.done.contains(a) && !self.done.contains(b))
            .map(|(_, b)| b)
            .collect();
        self.net.node_ids().filter(|n| !self.done.contains(n) && !blocked.contains(n)).collect()
    }

    /// Canonical encoding of (state, remaining network, insertions used).
    /// Equal signatures imply isomorphic remaining networks.
    fn signature(&self) -> Signature {
        let remaining: Vec<NodeId> = self.net.node_ids().filter(|n| !self.done.contains(n)).collect();
        let index: BTreeMap<NodeId, usize> = remaining.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let labels: Vec<Task> = remaining.iter().map(|n| self.net.label(*n).expect("node")).collect();
        let edges: Vec<(usize, usize)> = self
            .net
            .edges()
            .filter_map(|(a, b)| Some((*index.get(&a)?, *index.get(&b)?)))
            .collect();
        // Color refinement on (label, predecessor colors, successor colors).
        let mut color: Vec<usize> = rank(&labels);
        for _ in 0..3 {
            let keys: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..remaining.len())
                .map(|i| {
                    let mut preds: Vec<usize> = edges.iter().filter(|e| e.1 == i).map(|e| color[e.0]).collect();
                    let mut succs: Vec<usize> = edges.iter().filter(|e| e.0 == i).map(|e| color[e.1]).collect();
                    preds.sort_unstable();
                    succs.sort_unstable();
                    (color[i], preds, succs)
                })
                .collect();
            let refined = rank(&keys);
            if refined == color {
                break;
            }
            color = refined;
        }
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by_key(|&i| (color[i], i));
        let mut position = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut canon_edges: Vec<(u32, u32)> =
            edges.iter().map(|&(a, b)| (position[a] as u32, position[b] as u32)).collect();
        canon_edges.sort_unstable();
        Signature {
            state: self.state.clone(),
            insertions: self.inserted.len(),
            labels: order.iter().map(|&i| labels[i]).collect(),
            edges: canon_edges,
        }
    }
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let distinct: BTreeSet<&T> = keys.iter().collect();
    let ids: BTreeMap<&T, usize> = distinct.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| ids[k]).collect()
}

#[derive(PartialEq, Eq, Hash)]
struct Signature {
    state: State,
    insertions: usize,
    labels: Vec<Task>,
    edges: Vec<(u32, u32)>,
}

/// Tie-breaking key: (cost, insertions, executed node ids), then FIFO.
struct Queued {
    cost: f64,
    insertions: usize,
    lin: Vec<NodeId>,
    seq: u64,
    node: SearchNode,
}

impl Queued {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.insertions.cmp(&other.insertions))
            .then_with(|| self.lin.cmp(&other.lin))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // Reversed so BinaryHeap pops the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

struct Search<'p, 'a> {
    planner: &'p Planner<'a>,
    root: &'p TaskNetwork,
    expansions: usize,
    started: Instant,
    pool: Vec<OpId>,
}

impl Search<'_, '_> {
    fn charge(&mut self) -> Result<(), PlanError> {
        self.expansions += 1;
        let limits = &self.planner.limits;
        if self.expansions > limits.node_limit {
            return Err(PlanError::ResourceExhausted {
                expansions: self.expansions - 1,
                reason: format!("node limit {} reached", limits.node_limit),
            });
        }
        if let Some(limit) = limits.time_limit {
            if self.expansions % 256 == 0 && self.started.elapsed() > limit {
                return Err(PlanError::ResourceExhausted {
                    expansions: self.expansions,
                    reason: format!("time limit {} ms reached", limit.as_millis()),
                });
            }
        }
        Ok(())
    }

    fn successors(&self, node: &SearchNode) -> Vec<SearchNode> {
        let domain = self.planner.domain;
        let ready = node.unconstrained();
        let compound = ready.iter().find_map(|n| match node.net.label(*n) {
            Some(Task::Compound(c)) => Some((*n, c)),
            _ => None,
        });
        let mut out = Vec::new();
        if let Some((id, head)) = compound {
            for &m in domain.methods_for(head) {
                let net = node.net.decompose(id, domain.method(m), domain).expect("head matches label");
                let mut child = node.clone();
                child.net = net;
                child.trace.push((id, m));
                out.push(child);
            }
            return out;
        }
        for id in ready {
            let Some(Task::Primitive(base)) = node.net.label(id) else { continue };
            for op in std::iter::once(base).chain(domain.variants(base).iter().copied()) {
                let operator = domain.operator(op);
                if !operator.is_applicable(&node.state) {
                    continue;
                }
                let mut child = node.clone();
                if op != base {
                    child.net.relabel(id, Task::Primitive(op)).expect("node exists");
                }
                child.state = operator.apply_unchecked(&node.state);
                child.done.insert(id);
                child.lin.push(id);
                child.cost += operator.cost;
                out.push(child);
            }
        }
        if node.inserted.len() < self.planner.insertion_limit() {
            let penalty = self.planner.limits.insertion_penalty;
            for &op in &self.pool {
                let operator = domain.operator(op);
                if !operator.is_applicable(&node.state) {
                    continue;
                }
                let id = NodeId::inserted(node.inserted.len());
                let mut child = node.clone();
                child.state = operator.apply_unchecked(&node.state);
                child.inserted.insert(id, op);
                child.done.insert(id);
                child.lin.push(id);
                child.cost += operator.cost * penalty;
                out.push(child);
            }
        }
        out
    }

    fn finish(&self, node: SearchNode) -> Solution {
        Solution {
            execution: Execution {
                root: self.root.clone(),
                network: node.net,
                trace: DecompositionTrace { steps: node.trace },
                linearization: node.lin,
                inserted: node.inserted,
            },
            total_cost: node.cost,
            root_method: None,
        }
    }

    fn min_cost(&mut self, root: SearchNode) -> Result<Solution, PlanError> {
        let mut open = BinaryHeap::new();
        let mut closed: HashSet<Signature> = HashSet::new();
        let mut seq = 0u64;
        open.push(Queued { cost: 0.0, insertions: 0, lin: Vec::new(), seq, node: root });
        while let Some(Queued { node, .. }) = open.pop() {
            if !closed.insert(node.signature()) {
                continue;
            }
            if node.is_goal() {
                return Ok(self.finish(node));
            }
            self.charge()?;
            for child in self.successors(&node) {
                seq += 1;
                open.push(Queued {
                    cost: child.cost,
                    insertions: child.inserted.len(),
                    lin: child.lin.clone(),
                    seq,
                    node: child,
                });
            }
        }
        Err(PlanError::Unsolvable)
    }

    fn exhaustive(&mut self, root: SearchNode, scorer: &Scorer) -> Result<Solution, PlanError> {
        let mut best: Option<(LogProb, Solution)> = None;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.is_goal() {
                let candidate = self.finish(node);
                let score = scorer(&candidate);
                let better = match &best {
                    None => true,
                    Some((s, incumbent)) => match score.total_cmp(s) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => tie_break(&candidate, incumbent) == Ordering::Less,
                    },
                };
                if better {
                    best = Some((score, candidate));
                }
                continue;
            }
            self.charge()?;
            let mut children = self.successors(&node);
            children.reverse();
            stack.extend(children);
        }
        best.map(|(_, s)| s).ok_or(PlanError::Unsolvable)
    }
}

fn tie_break(a: &Solution, b: &Solution) -> Ordering {
    a.total_cost
        .total_cmp(&b.total_cost)
        .then(a.insertions().cmp(&b.insertions()))
        .then_with(|| a.execution.linearization.cmp(&b.execution.linearization))
}
