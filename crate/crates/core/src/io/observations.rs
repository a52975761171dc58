use super::{ParseError, Pos};
use crate::model::{Domain, OpId, Task};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ObservationFile {
    pub symbols: Vec<OpId>,
}

/// One primitive action symbol per line; `;` starts a comment and blank
/// lines are skipped.
pub fn parse_observations(text: &str, domain: &Domain) -> Result<ObservationFile, ParseError> {
    let mut symbols = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("");
        let col = line.len() - line.trim_start().len() + 1;
        let pos = Pos { line: i + 1, col };
        let mut words = line.split_whitespace();
        let Some(word) = words.next() else { continue };
        if words.next().is_some() {
            return Err(ParseError::syntax(pos, "expected one action symbol per line"));
        }
        match domain.task(word) {
            Some(Task::Primitive(op)) => symbols.push(op),
            _ => return Err(ParseError::undeclared(pos, "primitive action", word)),
        }
    }
    Ok(ObservationFile { symbols })
}

pub fn write_observations(observations: &[OpId], domain: &Domain) -> String {
    observations.iter().map(|&op| format!("{}\n", domain.operator(op).name)).collect()
}
