//! `htnrecog` command-line front end.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 unsolvable,
//! 3 search or enumeration limit reached.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use htnrecog::generative::GenerativeConfig;
use htnrecog::harness::{evaluate, gen_kitchen, rows_to_csv, summarize, summary_to_csv, BenchmarkSuite, EvalConfig, KitchenCounts};
use htnrecog::io::{parse_domain, parse_observations, parse_problem, write_observations, write_report, ProblemFile, ReportFormat};
use htnrecog::model::Domain;
use htnrecog::oracle::{exact_posterior, sample_execution, EnumerationBounds, OracleError, SampleError};
use htnrecog::planner::{compile_observations, EmbeddingMode, PlanError, Planner, PlannerLimits, Solution};
use htnrecog::recognizer::{recognize, Estimator, PhgrInstance, PosteriorReport, RecognitionConfig};

#[derive(Parser)]
#[command(name = "htnrecog", version, about = "Probabilistic goal recognition over HTN hypotheses")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan for one hypothesis, or for all of them through a dummy root.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        /// Hypothesis to plan for; all hypotheses compete when omitted.
        #[arg(long)]
        hypothesis: Option<String>,
        /// Force the plan to embed these observations.
        #[arg(long)]
        observations: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior over the hypotheses given observations.
    Recognize {
        domain: PathBuf,
        problem: PathBuf,
        observations: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact posterior by exhaustive enumeration (tiny instances only).
    Oracle {
        domain: PathBuf,
        problem: PathBuf,
        observations: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 10)]
        max_primitive_nodes: usize,
        #[arg(long, default_value_t = 200_000)]
        max_executions: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate a synthetic kitchen benchmark suite into a directory.
    GenKitchen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        starters: usize,
        #[arg(long, default_value_t = 4)]
        mains: usize,
        #[arg(long, default_value_t = 2)]
        desserts: usize,
        #[arg(long, default_value_t = 48)]
        instances: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-k accuracy of every estimator on a suite, one CSV row per
    /// instance, ratio, estimator and k.
    Eval {
        suite: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.4, 0.6, 0.8])]
        ratios: Vec<f64>,
        /// Randomly drop a fraction of each observed prefix.
        #[arg(long)]
        partial: bool,
        #[arg(long, default_value_t = 0.2)]
        drop_fraction: f64,
        /// Fill the wall_ms column; output is then machine dependent.
        #[arg(long)]
        timing: bool,
        /// Also write per-ratio accuracy means here.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one execution of a hypothesis from the generative model and
    /// print its actions, one per line.
    Sample {
        domain: PathBuf,
        problem: PathBuf,
        #[arg(long)]
        hypothesis: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long = "top-k", default_value_t = 5)]
    top_k: usize,
    #[arg(long, value_enum, default_value_t = EstimatorArg::ThreeStage)]
    estimator: EstimatorArg,
    #[arg(long)]
    allow_insertion: bool,
    #[arg(long, default_value_t = 1.0)]
    insertion_penalty: f64,
    #[arg(long, default_value_t = 2)]
    insertion_limit: usize,
    #[arg(long, default_value_t = 500_000)]
    node_limit: usize,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// Search for the most probable rather than the cheapest solution.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    ThreeStage,
    Simplified,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl ModelArgs {
    fn limits(&self) -> PlannerLimits {
        PlannerLimits {
            node_limit: self.node_limit,
            time_limit: self.time_limit_ms.map(Duration::from_millis),
            insertion_limit: self.insertion_limit,
            insertion_penalty: self.insertion_penalty,
            mode: if self.exhaustive {
                htnrecog::planner::SearchMode::ExhaustiveMaxProbability
            } else {
                htnrecog::planner::SearchMode::MinCost
            },
        }
    }

    fn generative(&self) -> GenerativeConfig {
        GenerativeConfig { beta: self.beta, rho: self.rho, ..Default::default() }
    }

    fn recognition(&self) -> anyhow::Result<RecognitionConfig> {
        let config = RecognitionConfig {
            generative: self.generative(),
            gamma: self.gamma,
            k: self.top_k,
            estimator: match self.estimator {
                EstimatorArg::ThreeStage => Estimator::ThreeStage,
                EstimatorArg::Simplified => Estimator::Simplified,
                EstimatorArg::Baseline => Estimator::Baseline,
            },
            limits: self.limits(),
            insertion: self.allow_insertion,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn plan_failure(err: PlanError) -> Failure {
    let code = match err {
        PlanError::Unsolvable => 2,
        PlanError::ResourceExhausted { .. } => 3,
    };
    Failure { code, error: err.into() }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(domain: &Path, problem: &Path) -> anyhow::Result<(Domain, ProblemFile)> {
    let d = parse_domain(&read(domain)?).with_context(|| format!("{}", domain.display()))?;
    let p = parse_problem(&read(problem)?, &d).with_context(|| format!("{}", problem.display()))?;
    Ok((d, p))
}

fn load_instance(domain: &Path, problem: &Path, observations: &Path, model: &ModelArgs) -> anyhow::Result<PhgrInstance> {
    let (d, p) = load(domain, problem)?;
    let obs = parse_observations(&read(observations)?, &d).with_context(|| format!("{}", observations.display()))?;
    Ok(PhgrInstance::from_files(d, p, obs, model.recognition()?)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(mut report: PosteriorReport, seed: u64, output: &OutputArgs) -> anyhow::Result<()> {
    report.config.seed = Some(seed);
    let format = match output.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    emit(output.out.as_deref(), &write_report(&report, format))
}

fn solution_json(domain: &Domain, hypothesis: &str, solution: &Solution) -> serde_json::Value {
    let actions = solution.execution.actions();
    let inserted: Vec<usize> = solution
        .execution
        .linearization
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_inserted())
        .map(|(i, _)| i)
        .collect();
    serde_json::json!({
        "hypothesis": hypothesis,
        "cost": solution.total_cost,
        "plan": domain.action_names(&actions),
        "inserted_positions": inserted,
        "methods": solution.execution.trace.methods().map(|m| domain.method(m).name.clone()).collect::<Vec<_>>(),
    })
}

fn cmd_plan(
    domain: &Path,
    problem: &Path,
    hypothesis: Option<&str>,
    observations: Option<&Path>,
    model: &ModelArgs,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (d, p) = load(domain, problem)?;
    let obs = match observations {
        Some(path) => parse_observations(&read(path)?, &d).with_context(|| format!("{}", path.display()))?.symbols,
        None => Vec::new(),
    };
    let mode = if model.rho == 1.0 { EmbeddingMode::Prefix } else { EmbeddingMode::Subsequence };
    let compiled = compile_observations(&d, &obs, mode);
    let s0 = compiled.initial_state(&p.initial_state);
    let limits = model.limits();
    let (name, solution) = match hypothesis {
        Some(name) => {
            let index = p.hypothesis_index(name).ok_or_else(|| anyhow!("unknown hypothesis `{name}`"))?;
            let n0 = compiled.attach_hypothesis(&p.hypotheses[index].1);
            let sol = Planner::new(&compiled.domain, limits).with_insertion(model.allow_insertion).plan(&s0, &n0);
            let sol = sol.map_err(plan_failure)?;
            (name.to_string(), htnrecog::planner::decode_solution(&sol, &compiled))
        }
        None => {
            let networks: Vec<_> = p.hypotheses.iter().map(|(_, g)| g.clone()).collect();
            let root = compiled.build_dummy_root(&networks);
            let sol = Planner::new(&root.domain, limits).with_insertion(model.allow_insertion).plan(&s0, &root.network);
            let sol = sol.map_err(plan_failure)?;
            let (h, decoded) = root.split(&sol, &compiled).ok_or_else(|| anyhow!("dummy-root solution without a root method"))?;
            (p.hypotheses[h].0.clone(), decoded)
        }
    };
    let text = serde_json::to_string_pretty(&solution_json(&d, &name, &solution)).expect("serializable") + "\n";
    emit(out, &text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Plan { domain, problem, hypothesis, observations, model, out } => {
            cmd_plan(&domain, &problem, hypothesis.as_deref(), observations.as_deref(), &model, out.as_deref())
        }
        Cmd::Recognize { domain, problem, observations, model, output } => {
            let instance = load_instance(&domain, &problem, &observations, &model)?;
            let report = recognize(&instance);
            emit_report(report, model.seed, &output)?;
            Ok(())
        }
        Cmd::Oracle { domain, problem, observations, model, max_depth, max_primitive_nodes, max_executions, output } => {
            let instance = load_instance(&domain, &problem, &observations, &model)?;
            let bounds = EnumerationBounds {
                max_decomposition_depth: max_depth,
                max_primitive_nodes,
                max_insertions: model.insertion_limit,
                max_executions,
            };
            let report = exact_posterior(&instance, &bounds)
                .map_err(|e @ OracleError::BoundExceeded { .. }| Failure { code: 3, error: e.into() })?;
            emit_report(report, model.seed, &output)?;
            Ok(())
        }
        Cmd::GenKitchen { seed, starters, mains, desserts, instances, out } => {
            if mains == 0 {
                return Err(anyhow!("at least one main dish is required").into());
            }
            let suite = gen_kitchen(seed, KitchenCounts { starters, mains, desserts }, instances);
            suite.save(&out).map_err(anyhow::Error::from)?;
            log::info!("wrote {} instances over {} meals to {}", suite.instances.len(), suite.problem.hypotheses.len(), out.display());
            Ok(())
        }
        Cmd::Eval { suite, ratios, partial, drop_fraction, timing, summary, model, out } => {
            if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(anyhow!("ratios must lie in [0, 1]").into());
            }
            if !(0.0..1.0).contains(&drop_fraction) {
                return Err(anyhow!("drop fraction must lie in [0, 1)").into());
            }
            let suite = BenchmarkSuite::load(&suite).map_err(anyhow::Error::from)?;
            let config = EvalConfig {
                ratios,
                recognition: model.recognition()?,
                partial,
                drop_fraction,
                seed: model.seed,
                timing,
                ..Default::default()
            };
            let rows = evaluate(&suite, &config);
            emit(out.as_deref(), &rows_to_csv(&rows))?;
            if let Some(path) = summary {
                emit(Some(&path), &summary_to_csv(&summarize(&rows)))?;
            }
            Ok(())
        }
        Cmd::Sample { domain, problem, hypothesis, model, out } => {
            let (d, p) = load(&domain, &problem)?;
            let index = p.hypothesis_index(&hypothesis).ok_or_else(|| anyhow!("unknown hypothesis `{hypothesis}`"))?;
            let config = model.generative();
            config.validate().map_err(anyhow::Error::from)?;
            match sample_execution(&d, &p.hypotheses[index].1, &p.initial_state, &config, model.seed) {
                Ok(exec) => {
                    emit(out.as_deref(), &write_observations(&exec.actions(), &d))?;
                    Ok(())
                }
                Err(e @ SampleError::DeadEnd) => Err(Failure { code: 2, error: e.into() }),
                Err(e @ SampleError::TooDeep(_)) => Err(Failure { code: 3, error: e.into() }),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HTNRECOG_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
