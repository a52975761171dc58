use super::sexpr::read;
use super::{parse_network, parse_number, write_network, ParseError, ParseErrorKind};
use crate::model::{Domain, State, TaskNetwork};
use crate::prob::normalize_priors;

/// Initial state, named goal hypotheses, and their priors (aligned with
/// `hypotheses`, summing to 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub initial_state: State,
    pub hypotheses: Vec<(String, TaskNetwork)>,
    pub priors: Vec<f64>,
}

impl ProblemFile {
    pub fn hypothesis_index(&self, name: &str) -> Option<usize> {
        self.hypotheses.iter().position(|(n, _)| n == name)
    }
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<ProblemFile, ParseError> {
    let top = read(text)?;
    let sections = top.tagged("problem")?;
    let mut initial_state = None;
    let mut hypotheses: Vec<(String, TaskNetwork)> = Vec::new();
    let mut priors: Vec<Option<f64>> = Vec::new();
    let mut prior_sections = Vec::new();

    for section in sections {
        match section.head() {
            Some("init") => {
                if initial_state.is_some() {
                    return Err(ParseError::syntax(section.pos(), "repeated init clause"));
                }
                let mut s = State::new();
                for atom in section.tagged("init")? {
                    let name = atom.symbol()?;
                    s.insert(domain.atom_id(name).ok_or_else(|| ParseError::undeclared(atom.pos(), "atom", name))?);
                }
                initial_state = Some(s);
            }
            Some("hypothesis") => {
                let items = section.tagged("hypothesis")?;
                let (name, tasks, order) = match items {
                    [name, tasks] => (name, tasks, None),
                    [name, tasks, order] => (name, tasks, Some(order)),
                    _ => return Err(ParseError::syntax(section.pos(), "expected `(hypothesis NAME (tasks ...) (order ...))`")),
                };
                let name_str = name.symbol()?;
                if hypotheses.iter().any(|(n, _)| n == name_str) {
                    return Err(ParseError::new(name.pos(), ParseErrorKind::Duplicate(name_str.to_string())));
                }
                hypotheses.push((name_str.to_string(), parse_network(domain, tasks, order)?));
                priors.push(None);
            }
            Some("prior") => prior_sections.push(section),
            _ => return Err(ParseError::syntax(section.pos(), "expected init, hypothesis or prior")),
        }
    }
    for section in &prior_sections {
        let [name, value] = section.tagged("prior")? else {
            return Err(ParseError::syntax(section.pos(), "expected `(prior NAME NUMBER)`"));
        };
        let name_str = name.symbol()?;
        let Some(i) = hypotheses.iter().position(|(n, _)| n == name_str) else {
            return Err(ParseError::undeclared(name.pos(), "hypothesis", name_str));
        };
        if priors[i].replace(parse_number(value)?).is_some() {
            return Err(ParseError::new(name.pos(), ParseErrorKind::Duplicate(format!("prior {name_str}"))));
        }
    }
    let raw: Vec<f64> = if prior_sections.is_empty() {
        vec![1.0 / hypotheses.len() as f64; hypotheses.len()]
    } else {
        priors.iter().zip(&hypotheses).map(|(p, (name, _))| {
            p.ok_or_else(|| ParseError::new(top.pos(), ParseErrorKind::InvalidValue(format!("missing prior for `{name}`"))))
        }).collect::<Result<_, _>>()?
    };
    let priors = normalize_priors(&raw).map_err(|e| ParseError::new(top.pos(), ParseErrorKind::InvalidValue(e.to_string())))?;
    Ok(ProblemFile { initial_state: initial_state.unwrap_or_default(), hypotheses, priors })
}

pub fn write_problem(problem: &ProblemFile, domain: &Domain) -> String {
    let mut out = String::from("(problem\n");
    let init: String = problem.initial_state.atoms().map(|a| format!(" {}", domain.atom_name(a))).collect();
    out += &format!("  (init{init})\n");
    for (name, net) in &problem.hypotheses {
        out += &format!("  (hypothesis {name} {})\n", write_network(domain, net));
    }
    for ((name, _), p) in problem.hypotheses.iter().zip(&problem.priors) {
        out += &format!("  (prior {name} {p})\n");
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_domain;
    use crate::model::{NodeId, Task};
    use proptest::prelude::*;

    fn domain() -> Domain {
        parse_domain("(domain (atoms p q r) (operator a) (operator b) (compound X) (compound Y) (method m X (tasks (t a))))")
            .unwrap()
    }

    #[test]
    fn uniform_priors_by_default() {
        let d = domain();
        let p = parse_problem("(problem (init p) (hypothesis g1 (tasks (t X))) (hypothesis g2 (tasks (t Y)) (order)))", &d)
            .unwrap();
        assert_eq!(p.priors, vec![0.5, 0.5]);
        assert_eq!(p.hypothesis_index("g2"), Some(1));
        assert!(p.initial_state.contains(d.atom_id("p").unwrap()));
        assert_eq!(p.hypotheses[0].1.label(NodeId(0)), Some(Task::Compound(d.compound_id("X").unwrap())));
    }

    #[test]
    fn priors_are_normalized() {
        let p = parse_problem(
            "(problem (init) (hypothesis g1 (tasks (t X))) (hypothesis g2 (tasks (t Y))) (prior g1 0.2) (prior g2 0.2))",
            &domain(),
        )
        .unwrap();
        assert_eq!(p.priors, vec![0.5, 0.5]);
    }

    #[test]
    fn errors() {
        let d = domain();
        let unknown = parse_problem("(problem (hypothesis g (tasks (t Z))))", &d).unwrap_err();
        assert_eq!(unknown.kind, ParseErrorKind::Undeclared { kind: "task", name: "Z".into() });
        let dup = parse_problem("(problem (hypothesis g (tasks)) (hypothesis g (tasks)))", &d).unwrap_err();
        assert_eq!(dup.kind, ParseErrorKind::Duplicate("g".into()));
        let partial = parse_problem("(problem (hypothesis g (tasks)) (hypothesis h (tasks)) (prior g 1))", &d).unwrap_err();
        assert!(matches!(partial.kind, ParseErrorKind::InvalidValue(_)));
        let zero = parse_problem("(problem (hypothesis g (tasks)) (prior g 0))", &d).unwrap_err();
        assert!(matches!(zero.kind, ParseErrorKind::InvalidValue(_)));
        let who = parse_problem("(problem (hypothesis g (tasks)) (prior h 1))", &d).unwrap_err();
        assert!(matches!(who.kind, ParseErrorKind::Undeclared { kind: "hypothesis", .. }));
        let atom = parse_problem("(problem (init s))", &d).unwrap_err();
        assert!(matches!(atom.kind, ParseErrorKind::Undeclared { kind: "atom", .. }));
    }

    proptest! {
        #[test]
        fn problem_round_trip(
            init in prop::collection::btree_set(0u32..3, 0..3),
            hyps in prop::collection::vec((prop::collection::vec(0usize..4, 0..4), any::<bool>()), 0..4),
            weights in prop::collection::vec(1u32..10, 4),
        ) {
            let d = domain();
            let tasks = [d.task("a").unwrap(), d.task("b").unwrap(), d.task("X").unwrap(), d.task("Y").unwrap()];
            let hypotheses: Vec<(String, TaskNetwork)> = hyps.iter().enumerate().map(|(i, (ts, chain))| {
                let labels: Vec<Task> = ts.iter().map(|&t| tasks[t]).collect();
                let order: Vec<(usize, usize)> = if *chain { (1..labels.len()).map(|j| (j - 1, j)).collect() } else { vec![] };
                (format!("g{i}"), TaskNetwork::from_parts(&labels, &order).unwrap())
            }).collect();
            let raw: Vec<f64> = weights[..hypotheses.len()].iter().map(|&w| f64::from(w)).collect();
            let problem = ProblemFile {
                initial_state: init.into_iter().map(crate::model::AtomId).collect(),
                priors: normalize_priors(&raw).unwrap(),
                hypotheses,
            };
            let text = write_problem(&problem, &d);
            prop_assert_eq!(parse_problem(&text, &d).unwrap(), problem);
        }
    }
}
