//! Benchmark support: the synthetic kitchen suite, observation prefixes,
//! top-k evaluation, and random tiny instances for exhaustive checks.

pub mod eval;
pub mod kitchen;
pub mod observe;
pub mod random;

pub use eval::{accuracy, evaluate, rows_to_csv, summarize, summary_to_csv, EvalConfig, EvalRow, SummaryRow};
pub use kitchen::{gen_kitchen, kitchen_domain, BenchmarkSuite, KitchenCounts, SuiteError, SuiteInstance};
pub use observe::{make_observations, prefix_len};
pub use random::{random_domain, random_primitive_network, random_tiny_instance, TinyInstance};
