use rand::seq::SliceRandom;
use rand::Rng;

use crate::generative::GenerativeConfig;
use crate::model::{AtomId, CompoundId, Domain, Method, OpId, PrimitiveOperator, State, Task, TaskNetwork};
use crate::oracle::sample_execution_with;

/// A small recognition problem sized for exhaustive enumeration: at most
/// two decomposition levels and at most eight primitive nodes per
/// hypothesis.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub domain: Domain,
    pub s0: State,
    pub hypotheses: Vec<(String, TaskNetwork)>,
    pub observations: Vec<OpId>,
    pub rho: f64,
}

fn subset<R: Rng>(rng: &mut R, atoms: &[AtomId], p: f64) -> Vec<AtomId> {
    atoms.iter().copied().filter(|_| rng.gen_bool(p)).collect()
}

/// Random operator set over `n_atoms` atoms.
pub fn random_operators<R: Rng>(rng: &mut R, domain: &mut Domain, n_atoms: usize, n_ops: usize) -> Vec<OpId> {
    let atoms: Vec<AtomId> = (0..n_atoms).map(|i| domain.add_atom(format!("p{i}")).expect("fresh")).collect();
    (0..n_ops)
        .map(|i| {
            let pre = subset(rng, &atoms, 0.3);
            let add = subset(rng, &atoms, 0.4);
            let del: Vec<AtomId> = subset(rng, &atoms, 0.3).into_iter().filter(|a| !add.contains(a)).collect();
            domain.add_operator(PrimitiveOperator::new(format!("a{i}"), pre, add, del)).expect("fresh")
        })
        .collect()
}

/// Random network over `tasks` with each forward pair ordered with
/// probability `p_edge`.
pub fn random_network<R: Rng>(rng: &mut R, tasks: &[Task], n: usize, p_edge: f64) -> TaskNetwork {
    let labels: Vec<Task> = (0..n).map(|_| *tasks.choose(rng).expect("nonempty")).collect();
    let order: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(p_edge)).collect();
    TaskNetwork::from_parts(&labels, &order).expect("forward edges are acyclic")
}

/// A random primitive network of 1..=`max_nodes` nodes with its domain and
/// initial state.
pub fn random_primitive_network<R: Rng>(rng: &mut R, max_nodes: usize) -> (Domain, TaskNetwork, State) {
    let mut domain = Domain::new();
    let ops = random_operators(rng, &mut domain, 3, 4);
    let tasks: Vec<Task> = ops.into_iter().map(Task::Primitive).collect();
    let n = rng.gen_range(1..=max_nodes);
    let net = random_network(rng, &tasks, n, 0.3);
    let s0 = (0..3).filter(|_| rng.gen_bool(0.5)).map(AtomId).collect();
    (domain, net, s0)
}

/// Two compound layers: `C1` expands into primitives only, `C0` into
/// primitives and `C1`. Each compound has one to three methods of one or
/// two subtasks with random costs.
pub fn random_domain<R: Rng>(rng: &mut R) -> Domain {
    let mut domain = Domain::new();
    let ops = random_operators(rng, &mut domain, 3, 4);
    let c0 = domain.add_compound("C0").expect("fresh");
    let c1 = domain.add_compound("C1").expect("fresh");
    let primitives: Vec<Task> = ops.iter().map(|&o| Task::Primitive(o)).collect();
    let mut upper = primitives.clone();
    upper.push(Task::Compound(c1));
    let mut count = 0;
    for (head, tasks) in [(c0, &upper), (c1, &primitives)] {
        for _ in 0..rng.gen_range(1..=3) {
            let n = rng.gen_range(1..=2);
            let net = random_network(rng, tasks, n, 0.5);
            let cost = rng.gen_range(1..=3) as f64;
            domain.add_method(Method::new(format!("m{count}"), head, net).with_cost(cost)).expect("valid");
            count += 1;
        }
    }
    domain
}

/// Random domain, two or three hypotheses of one or two tasks, and
/// observations taken from a sampled execution of one hypothesis. With
/// probability 1/4 one observed symbol is replaced at random, so some
/// instances have hypotheses that cannot explain the observations. `rho`
/// is drawn from {0.5, 0.8, 1}; with `rho = 1` the observations are a prefix
/// of the sampled plan, otherwise a random subsequence.
pub fn random_tiny_instance<R: Rng>(rng: &mut R) -> TinyInstance {
    loop {
        let domain = random_domain(rng);
        let tasks: Vec<Task> = (0..domain.operator_count())
            .map(|i| Task::Primitive(OpId(i as u32)))
            .chain((0..domain.compound_count()).map(|i| Task::Compound(CompoundId(i as u32))))
            .collect();
        let s0: State = (0..3).filter(|_| rng.gen_bool(0.5)).map(AtomId).collect();
        let hypotheses: Vec<(String, TaskNetwork)> = (0..rng.gen_range(2..=3))
            .map(|i| {
                let n = rng.gen_range(1..=2);
                (format!("g{i}"), random_network(rng, &tasks, n, 0.5))
            })
            .collect();
        let rho = *[0.5, 0.8, 1.0].choose(rng).expect("nonempty");
        let source = &hypotheses[rng.gen_range(0..hypotheses.len())].1;
        let Ok(exec) = sample_execution_with(&domain, source, &s0, &GenerativeConfig::default(), rng) else {
            continue;
        };
        let plan = exec.actions();
        if plan.is_empty() {
            continue;
        }
        let mut observations: Vec<OpId> = if rho == 1.0 {
            plan[..rng.gen_range(1..=plan.len())].to_vec()
        } else {
            plan.iter().copied().filter(|_| rng.gen_bool(0.6)).collect()
        };
        if !observations.is_empty() && rng.gen_bool(0.25) {
            let i = rng.gen_range(0..observations.len());
            observations[i] = OpId(rng.gen_range(0..domain.operator_count()) as u32);
        }
        return TinyInstance { domain, s0, hypotheses, observations, rho };
    }
}
