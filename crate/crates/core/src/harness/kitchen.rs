use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::fs;
use std::path::Path;

use crate::generative::GenerativeConfig;
use crate::io::{parse_domain, parse_observations, parse_problem, write_domain, write_observations, write_problem, ProblemFile};
use crate::model::{CompoundId, Domain, Method, OpId, PrimitiveOperator, State, Task, TaskNetwork};
use crate::oracle::sample_execution_with;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KitchenCounts {
    pub starters: usize,
    pub mains: usize,
    pub desserts: usize,
}

impl KitchenCounts {
    /// Single main, starter + main, main + dessert, and three courses.
    pub fn meal_count(&self) -> usize {
        let (s, m, d) = (self.starters, self.mains, self.desserts);
        m + s * m + m * d + s * m * d
    }
}

impl Default for KitchenCounts {
    fn default() -> Self {
        KitchenCounts { starters: 2, mains: 4, desserts: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteInstance {
    pub name: String,
    /// Name of the ground-truth meal hypothesis.
    pub goal: String,
    pub trace: Vec<OpId>,
}

/// Every instance shares the domain and the hypothesis set (one hypothesis
/// per meal); instances differ in ground truth and sampled trace.
#[derive(Clone, Debug)]
pub struct BenchmarkSuite {
    pub seed: u64,
    pub counts: KitchenCounts,
    pub domain: Domain,
    pub problem: ProblemFile,
    pub instances: Vec<SuiteInstance>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    counts: KitchenCounts,
    instances: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    goal: String,
    trace: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

impl BenchmarkSuite {
    /// Writes `domain.htn`, `problem.htn`, one trace file per instance under
    /// `traces/`, and a `suite.json` manifest.
    pub fn save(&self, dir: &Path) -> Result<(), SuiteError> {
        let write = |rel: &str, text: String| {
            let path = dir.join(rel);
            fs::write(&path, text).map_err(|source| SuiteError::Io { path: path.display().to_string(), source })
        };
        fs::create_dir_all(dir.join("traces"))
            .map_err(|source| SuiteError::Io { path: dir.display().to_string(), source })?;
        write("domain.htn", write_domain(&self.domain))?;
        write("problem.htn", write_problem(&self.problem, &self.domain))?;
        let mut entries = Vec::new();
        for inst in &self.instances {
            let rel = format!("traces/{}.txt", inst.name);
            write(&rel, format!("; goal: {}\n{}", inst.goal, write_observations(&inst.trace, &self.domain)))?;
            entries.push(ManifestEntry { name: inst.name.clone(), goal: inst.goal.clone(), trace: rel });
        }
        let manifest = Manifest { seed: self.seed, counts: self.counts, instances: entries };
        write("suite.json", serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")
    }

    pub fn load(dir: &Path) -> Result<BenchmarkSuite, SuiteError> {
        let read = |rel: &str| {
            let path = dir.join(rel);
            fs::read_to_string(&path).map_err(|source| SuiteError::Io { path: path.display().to_string(), source })
        };
        let format = |rel: &str, message: String| SuiteError::Format { path: dir.join(rel).display().to_string(), message };
        let manifest: Manifest =
            serde_json::from_str(&read("suite.json")?).map_err(|e| format("suite.json", e.to_string()))?;
        let domain = parse_domain(&read("domain.htn")?).map_err(|e| format("domain.htn", e.to_string()))?;
        let problem = parse_problem(&read("problem.htn")?, &domain).map_err(|e| format("problem.htn", e.to_string()))?;
        let mut instances = Vec::new();
        for entry in manifest.instances {
            let trace = parse_observations(&read(&entry.trace)?, &domain).map_err(|e| format(&entry.trace, e.to_string()))?;
            if problem.hypothesis_index(&entry.goal).is_none() {
                return Err(format("suite.json", format!("unknown goal `{}`", entry.goal)));
            }
            instances.push(SuiteInstance { name: entry.name, goal: entry.goal, trace: trace.symbols });
        }
        Ok(BenchmarkSuite { seed: manifest.seed, counts: manifest.counts, domain, problem, instances })
    }
}

const STARTER_INGREDIENTS: &[&str] = &["lettuce", "tomato", "bread", "cheese", "olive"];
const MAIN_INGREDIENTS: &[&str] = &["noodles", "rice", "tomato", "garlic", "onion", "beef"];
const DESSERT_INGREDIENTS: &[&str] = &["flour", "sugar", "milk", "egg", "fruit"];

struct Builder {
    domain: Domain,
}

impl Builder {
    fn atom(&mut self, name: &str) -> crate::model::AtomId {
        self.domain.atom_id(name).unwrap_or_else(|| self.domain.add_atom(name).expect("fresh atom"))
    }

    fn op(&mut self, name: &str, pre: &[&str], add: &[&str]) -> OpId {
        if let Some(op) = self.domain.op_id(name) {
            return op;
        }
        let pre: Vec<_> = pre.iter().map(|a| self.atom(a)).collect();
        let add: Vec<_> = add.iter().map(|a| self.atom(a)).collect();
        self.domain.add_operator(PrimitiveOperator::new(name, pre, add, [])).expect("fresh operator")
    }

    fn get(&mut self, ingredient: &str) -> OpId {
        self.op(&format!("get_{ingredient}"), &[], &[&format!("have_{ingredient}")])
    }

    fn chop(&mut self, ingredient: &str) -> OpId {
        let have = format!("have_{ingredient}");
        self.op(&format!("chop_{ingredient}"), &[&have], &[&format!("chopped_{ingredient}")])
    }

    /// Dish with a quick method (fetch both ingredients, finish) and an
    /// elaborate one (also chop the first ingredient before finishing).
    /// Mains additionally boil water first.
    fn dish(&mut self, name: &str, ingredients: [&str; 2], main: bool) -> CompoundId {
        let have: Vec<String> = ingredients.iter().map(|i| format!("have_{i}")).collect();
        let mut pre: Vec<&str> = have.iter().map(String::as_str).collect();
        if main {
            pre.push("boiling");
        }
        let finish = self.op(&format!("cook_{name}"), &pre, &[&format!("served_{name}")]);
        let chopped = format!("chopped_{}", ingredients[0]);
        pre.push(&chopped);
        let finish_chopped = self.op(&format!("cook_{name}_fine"), &pre, &[&format!("served_{name}")]);
        let compound = self.domain.add_compound(name).expect("fresh dish");
        let gets: Vec<Task> = ingredients.iter().map(|i| Task::Primitive(self.get(i))).collect();
        let chop = Task::Primitive(self.chop(ingredients[0]));
        let water = if main {
            vec![Task::Primitive(self.get("water")), Task::Primitive(self.op("boil_water", &["have_water"], &["boiling"]))]
        } else {
            vec![]
        };
        let w = water.len();
        let mut quick: Vec<Task> = water.clone();
        quick.extend(&gets);
        quick.push(Task::Primitive(finish));
        let mut order: Vec<(usize, usize)> = if main { vec![(0, 1), (1, w + 2)] } else { vec![] };
        order.extend([(w, w + 2), (w + 1, w + 2)]);
        let net = TaskNetwork::from_parts(&quick, &order).expect("acyclic");
        self.domain.add_method(Method::new(format!("{name}_quick"), compound, net)).expect("fresh method");

        let mut fine: Vec<Task> = water;
        fine.extend(&gets);
        fine.push(chop);
        fine.push(Task::Primitive(finish_chopped));
        let mut order: Vec<(usize, usize)> = if main { vec![(0, 1), (1, w + 3)] } else { vec![] };
        order.extend([(w, w + 2), (w + 2, w + 3), (w + 1, w + 3)]);
        let net = TaskNetwork::from_parts(&fine, &order).expect("acyclic");
        self.domain.add_method(Method::new(format!("{name}_fine"), compound, net)).expect("fresh method");
        compound
    }
}

fn pick_two<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> [&'a str; 2] {
    let chosen: Vec<&str> = pool.choose_multiple(rng, 2).copied().collect();
    [chosen[0], chosen[1]]
}

/// Meal hypotheses in a fixed order: single mains, starter + main,
/// main + dessert, three courses. Courses are ordered.
fn meals(starters: &[CompoundId], mains: &[CompoundId], desserts: &[CompoundId], domain: &Domain) -> Vec<(String, TaskNetwork)> {
    let mut out = Vec::new();
    let mut push = |dishes: &[CompoundId]| {
        let name = dishes.iter().map(|d| domain.compound_name(*d)).collect::<Vec<_>>().join("+");
        let labels: Vec<Task> = dishes.iter().map(|d| Task::Compound(*d)).collect();
        let order: Vec<(usize, usize)> = (1..dishes.len()).map(|i| (i - 1, i)).collect();
        out.push((name, TaskNetwork::from_parts(&labels, &order).expect("chain")));
    };
    for &m in mains {
        push(&[m]);
    }
    for &s in starters {
        for &m in mains {
            push(&[s, m]);
        }
    }
    for &m in mains {
        for &d in desserts {
            push(&[m, d]);
        }
    }
    for &s in starters {
        for &m in mains {
            for &d in desserts {
                push(&[s, m, d]);
            }
        }
    }
    out
}

/// Builds the kitchen domain and all meal hypotheses for `counts`, drawing
/// dish ingredients from `seed`.
pub fn kitchen_domain(seed: u64, counts: KitchenCounts) -> (Domain, ProblemFile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder { domain: Domain::new() };
    let mut course = |b: &mut Builder, prefix: &str, n: usize, pool: &[&str], main: bool| -> Vec<CompoundId> {
        (0..n).map(|i| b.dish(&format!("{prefix}{i}"), pick_two(&mut rng, pool), main)).collect()
    };
    let starters = course(&mut b, "starter", counts.starters, STARTER_INGREDIENTS, false);
    let mains = course(&mut b, "main", counts.mains, MAIN_INGREDIENTS, true);
    let desserts = course(&mut b, "dessert", counts.desserts, DESSERT_INGREDIENTS, false);
    let hypotheses = meals(&starters, &mains, &desserts, &b.domain);
    let priors = vec![1.0 / hypotheses.len() as f64; hypotheses.len()];
    (b.domain, ProblemFile { initial_state: State::new(), hypotheses, priors })
}

/// Generates `n` instances: a uniformly drawn meal and a trace sampled from
/// the generative model (Boltzmann methods, uniform interleaving).
pub fn gen_kitchen(seed: u64, counts: KitchenCounts, n: usize) -> BenchmarkSuite {
    let (domain, problem) = kitchen_domain(seed, counts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b69_7463_6865_6e00);
    let config = GenerativeConfig::default();
    let instances = (0..n)
        .map(|i| {
            let (goal, network) = &problem.hypotheses[rng.gen_range(0..problem.hypotheses.len())];
            let exec = sample_execution_with(&domain, network, &problem.initial_state, &config, &mut rng)
                .expect("kitchen meals have no dead ends");
            exec.validate(&domain, &problem.initial_state).expect("sampled executions are valid");
            SuiteInstance { name: format!("kitchen-{i:03}"), goal: goal.clone(), trace: exec.actions() }
        })
        .collect();
    BenchmarkSuite { seed, counts, domain, problem, instances }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{plan, PlannerLimits};

    #[test]
    fn meal_counts() {
        let counts = KitchenCounts { starters: 2, mains: 3, desserts: 2 };
        assert_eq!(counts.meal_count(), 27);
        let (_, problem) = kitchen_domain(1, counts);
        assert_eq!(problem.hypotheses.len(), 27);
        assert_eq!(KitchenCounts::default().meal_count(), 36);
    }

    #[test]
    fn traces_replay_and_generation_is_deterministic() {
        let a = gen_kitchen(5, KitchenCounts::default(), 12);
        let b = gen_kitchen(5, KitchenCounts::default(), 12);
        assert_eq!(a.instances, b.instances);
        assert_eq!(a.domain, b.domain);
        for inst in &a.instances {
            let mut state = a.problem.initial_state.clone();
            for &op in &inst.trace {
                state = a.domain.operator(op).apply(&state).unwrap();
            }
            assert!(a.problem.hypothesis_index(&inst.goal).is_some());
        }
        assert_ne!(gen_kitchen(6, KitchenCounts::default(), 12).instances, a.instances);
    }

    #[test]
    fn suite_files_round_trip() {
        let suite = gen_kitchen(4, KitchenCounts { starters: 1, mains: 2, desserts: 1 }, 3);
        let dir = std::env::temp_dir().join(format!("htnrecog-suite-{}", std::process::id()));
        suite.save(&dir).unwrap();
        let loaded = BenchmarkSuite::load(&dir).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(loaded.instances, suite.instances);
        assert_eq!(loaded.domain, suite.domain);
        assert_eq!(loaded.problem, suite.problem);
        assert_eq!((loaded.seed, loaded.counts), (suite.seed, suite.counts));
    }

    #[test]
    fn every_meal_is_plannable() {
        let (domain, problem) = kitchen_domain(3, KitchenCounts::default());
        for (_, g) in &problem.hypotheses {
            plan(&domain, &problem.initial_state, g, &PlannerLimits::default()).unwrap();
        }
    }
}
