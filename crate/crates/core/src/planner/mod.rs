//! Progression planner with optional task insertion, plus the
//! observation-enforcing compilation used by the recognizer.

mod compile;
mod search;

pub use compile::{compile_observations, decode_solution, CompiledInstance, DummyRoot, EmbeddingMode};
pub use search::{plan, plan_with_insertion, PlanError, Planner, PlannerLimits, Scorer, SearchMode, Solution};
