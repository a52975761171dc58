use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kitchen::BenchmarkSuite;
use super::observe::make_observations;
use crate::recognizer::{Estimator, Evaluation, PhgrInstance, PosteriorReport, RecognitionConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub ratios: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub ks: Vec<usize>,
    pub recognition: RecognitionConfig,
    /// Drop a fraction of each prefix; detection probability becomes
    /// `1 - drop_fraction`.
    pub partial: bool,
    pub drop_fraction: f64,
    pub seed: u64,
    /// Record wall-clock times. Off by default so output is reproducible.
    pub timing: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ratios: vec![0.2, 0.4, 0.6, 0.8],
            estimators: Estimator::ALL.to_vec(),
            ks: vec![1, 3, 5],
            recognition: RecognitionConfig::default(),
            partial: false,
            drop_fraction: 0.2,
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub instance: String,
    pub ratio: f64,
    pub estimator: Estimator,
    pub k: usize,
    pub hit: u8,
    pub n_valid: usize,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub ratio: f64,
    pub estimator: Estimator,
    pub k: usize,
    pub accuracy: f64,
    pub mean_n_valid: f64,
    pub instances: usize,
}

fn hit(report: &PosteriorReport, goal: &str, k: usize) -> u8 {
    u8::from(report.top(k).any(|h| h.name == goal && h.posterior > 0.0))
}

/// Runs every instance × ratio × estimator. Three-stage and simplified
/// share one set of planner calls; the baseline is the first dummy-root
/// solution of that same run.
pub fn evaluate(suite: &BenchmarkSuite, config: &EvalConfig) -> Vec<EvalRow> {
    let mut recognition = config.recognition.clone();
    if config.partial {
        recognition.generative.rho = 1.0 - config.drop_fraction;
    }
    let jobs: Vec<(usize, usize)> =
        (0..suite.instances.len()).flat_map(|i| (0..config.ratios.len()).map(move |r| (i, r))).collect();
    let rows: Vec<Vec<EvalRow>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let inst = &suite.instances[i];
            let ratio = config.ratios[r];
            let obs_seed = config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((i * config.ratios.len() + r) as u64);
            let observations = make_observations(&inst.trace, ratio, config.partial, config.drop_fraction, obs_seed);
            let hyps = suite.problem.hypotheses.iter().zip(&suite.problem.priors).map(|((n, g), p)| (n.clone(), g.clone(), *p)).collect();
            let phgr = PhgrInstance::new(suite.domain.clone(), suite.problem.initial_state.clone(), hyps, observations, recognition.clone())
                .expect("validated configuration");
            let started = Instant::now();
            let eval = Evaluation::run(&phgr);
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            let mut out = Vec::new();
            for &estimator in &config.estimators {
                let report = eval.report(&phgr, estimator);
                let wall_ms = config.timing.then(|| match estimator {
                    Estimator::Baseline => {
                        let started = Instant::now();
                        crate::recognizer::baseline_recognize(&phgr);
                        started.elapsed().as_secs_f64() * 1e3
                    }
                    _ => elapsed,
                });
                for &k in &config.ks {
                    out.push(EvalRow {
                        instance: inst.name.clone(),
                        ratio,
                        estimator,
                        k,
                        hit: hit(&report, &inst.goal, k),
                        n_valid: report.evaluated(),
                        wall_ms,
                    });
                }
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// Mean accuracy and valid-hypothesis count per ratio × estimator × k.
pub fn summarize(rows: &[EvalRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(u64, &str, usize), (Estimator, f64, Vec<&EvalRow>)> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.ratio.to_bits(), row.estimator.as_str(), row.k))
            .or_insert_with(|| (row.estimator, row.ratio, Vec::new()))
            .2
            .push(row);
    }
    let mut out: Vec<SummaryRow> = groups
        .into_values()
        .map(|(estimator, ratio, rows)| {
            let n = rows.len() as f64;
            SummaryRow {
                ratio,
                estimator,
                k: rows[0].k,
                accuracy: rows.iter().map(|r| f64::from(r.hit)).sum::<f64>() / n,
                mean_n_valid: rows.iter().map(|r| r.n_valid as f64).sum::<f64>() / n,
                instances: rows.len(),
            }
        })
        .collect();
    out.sort_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.estimator.as_str().cmp(b.estimator.as_str())).then(a.k.cmp(&b.k)));
    out
}

/// Accuracy of `estimator` at `k` for one ratio, if present.
pub fn accuracy(summary: &[SummaryRow], ratio: f64, estimator: Estimator, k: usize) -> Option<f64> {
    summary.iter().find(|s| s.ratio == ratio && s.estimator == estimator && s.k == k).map(|s| s.accuracy)
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// Columns: instance, ratio, estimator, k, hit, n_valid, wall_ms (empty
/// unless timing was on).
pub fn rows_to_csv(rows: &[EvalRow]) -> String {
    to_csv(rows, &["instance", "ratio", "estimator", "k", "hit", "n_valid", "wall_ms"])
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    to_csv(rows, &["ratio", "estimator", "k", "accuracy", "mean_n_valid", "instances"])
}
