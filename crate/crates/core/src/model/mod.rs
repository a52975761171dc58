//! Ground propositional HTN model: states, operators, task networks,
//! methods, decomposition, linearization and executions.

mod domain;
mod execution;
mod network;
mod state;

pub use domain::{CompoundId, Domain, Method, MethodId, OpId, PrimitiveOperator};
pub use execution::{DecompositionTrace, Execution};
pub use network::{Linearizations, NodeId, Task, TaskNetwork, INSERTED_ID_BASE};
pub use state::{AtomId, State};
