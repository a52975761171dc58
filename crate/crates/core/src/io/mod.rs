//! Text formats: S-expression domain and problem files, line-based
//! observation files, and JSON/CSV recognition reports.
//!
//! ```text
//! domain      := (domain section*)
//! section     := (atoms SYM*)
//!              | (operator SYM clause*)      clause := (pre SYM*) | (add SYM*) | (del SYM*) | (cost NUM)
//!              | (compound SYM)
//!              | (method SYM SYM (tasks (LABEL SYM)*) (order (LABEL LABEL)*)? (cost NUM)?)
//! problem     := (problem (init SYM*) hyp* prior*)
//! hyp         := (hypothesis SYM (tasks (LABEL SYM)*) (order (LABEL LABEL)*)?)
//! prior       := (prior SYM NUM)
//! ```
//!
//! `;` starts a comment. Operator cost defaults to 1 and method cost to the
//! number of subtasks. Priors are either given for every hypothesis or for
//! none (uniform).

mod domain;
mod observations;
mod problem;
mod report;
mod sexpr;

use std::fmt;

use thiserror::Error;

use crate::error::ModelError;

pub use domain::{parse_domain, write_domain};
pub use observations::{parse_observations, write_observations, ObservationFile};
pub use problem::{parse_problem, write_problem, ProblemFile};
pub use report::{report_from_json, write_report, ReportFormat};

/// 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("order ({0} {1}) creates a cycle")]
    CyclicOrder(String, String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }

    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::new(pos, ParseErrorKind::Syntax(msg.into()))
    }

    pub(crate) fn undeclared(pos: Pos, kind: &'static str, name: &str) -> Self {
        ParseError::new(pos, ParseErrorKind::Undeclared { kind, name: name.to_string() })
    }

    pub(crate) fn from_model(pos: Pos, err: ModelError) -> Self {
        let kind = match err {
            ModelError::Duplicate(name) => ParseErrorKind::Duplicate(name),
            ModelError::Undeclared { kind, name } => ParseErrorKind::Undeclared { kind, name },
            other => ParseErrorKind::InvalidValue(other.to_string()),
        };
        ParseError::new(pos, kind)
    }
}

fn parse_number(expr: &sexpr::Sexpr) -> Result<f64, ParseError> {
    let s = expr.symbol()?;
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(ParseError::new(expr.pos(), ParseErrorKind::InvalidValue(format!("expected a nonnegative number, got `{s}`")))),
    }
}

/// Parses `(tasks (l1 sym) ...)` and an optional `(order (l1 l2) ...)`.
fn parse_network(
    domain: &crate::model::Domain,
    tasks: &sexpr::Sexpr,
    order: Option<&sexpr::Sexpr>,
) -> Result<crate::model::TaskNetwork, ParseError> {
    use crate::model::TaskNetwork;
    let mut labels: Vec<&str> = Vec::new();
    let mut net = TaskNetwork::new();
    let mut ids = Vec::new();
    for entry in tasks.tagged("tasks")? {
        let pair = entry.list()?;
        let [label, symbol] = pair else {
            return Err(ParseError::syntax(entry.pos(), "expected `(label task)`"));
        };
        let label = label.symbol()?;
        if labels.contains(&label) {
            return Err(ParseError::new(entry.pos(), ParseErrorKind::Duplicate(label.to_string())));
        }
        let name = symbol.symbol()?;
        let task = domain.task(name).ok_or_else(|| ParseError::undeclared(symbol.pos(), "task", name))?;
        labels.push(label);
        ids.push(net.add_node(task));
    }
    let Some(order) = order else { return Ok(net) };
    for entry in order.tagged("order")? {
        let pair = entry.list()?;
        let [a, b] = pair else {
            return Err(ParseError::syntax(entry.pos(), "expected `(before after)`"));
        };
        let index = |e: &sexpr::Sexpr| -> Result<usize, ParseError> {
            let l = e.symbol()?;
            labels.iter().position(|x| *x == l).ok_or_else(|| ParseError::undeclared(e.pos(), "subtask label", l))
        };
        let (i, j) = (index(a)?, index(b)?);
        if net.add_edge(ids[i], ids[j]).is_err() {
            return Err(ParseError::new(
                entry.pos(),
                ParseErrorKind::CyclicOrder(labels[i].to_string(), labels[j].to_string()),
            ));
        }
    }
    Ok(net)
}

/// `(tasks ...) (order ...)` with labels `t0, t1, ...` in node-id order.
fn write_network(domain: &crate::model::Domain, net: &crate::model::TaskNetwork) -> String {
    use std::collections::BTreeMap;
    let index: BTreeMap<_, _> = net.node_ids().enumerate().map(|(i, n)| (n, i)).collect();
    let tasks: Vec<String> = net.nodes().enumerate().map(|(i, (_, t))| format!("(t{i} {})", domain.task_name(t))).collect();
    let order: Vec<String> = net.edges().map(|(a, b)| format!("(t{} t{})", index[&a], index[&b])).collect();
    format!("(tasks {}) (order {})", tasks.join(" "), order.join(" "))
        .replace("(tasks )", "(tasks)")
        .replace("(order )", "(order)")
}
