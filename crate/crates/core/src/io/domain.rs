use super::sexpr::{read, Sexpr};
use super::{parse_network, parse_number, write_network, ParseError};
use crate::model::{AtomId, Domain, Method, PrimitiveOperator, Task};

pub fn parse_domain(text: &str) -> Result<Domain, ParseError> {
    let top = read(text)?;
    let sections = top.tagged("domain")?;
    let mut domain = Domain::new();

    // Atoms first, then operators and compounds, then methods, so that
    // sections may reference symbols declared further down.
    for section in sections.iter().filter(|s| s.head() == Some("atoms")) {
        for atom in section.tagged("atoms")? {
            domain.add_atom(atom.symbol()?).map_err(|e| ParseError::from_model(atom.pos(), e))?;
        }
    }
    for section in sections {
        match section.head() {
            Some("operator") => parse_operator(&mut domain, section)?,
            Some("compound") => {
                let [name] = section.tagged("compound")? else {
                    return Err(ParseError::syntax(section.pos(), "expected `(compound NAME)`"));
                };
                domain.add_compound(name.symbol()?).map_err(|e| ParseError::from_model(name.pos(), e))?;
            }
            Some("atoms" | "method") => {}
            _ => return Err(ParseError::syntax(section.pos(), "expected atoms, operator, compound or method")),
        }
    }
    for section in sections.iter().filter(|s| s.head() == Some("method")) {
        parse_method(&mut domain, section)?;
    }
    Ok(domain)
}

fn atoms(domain: &Domain, items: &[Sexpr]) -> Result<Vec<AtomId>, ParseError> {
    items
        .iter()
        .map(|a| {
            let name = a.symbol()?;
            domain.atom_id(name).ok_or_else(|| ParseError::undeclared(a.pos(), "atom", name))
        })
        .collect()
}

fn parse_operator(domain: &mut Domain, section: &Sexpr) -> Result<(), ParseError> {
    let items = section.tagged("operator")?;
    let Some((name, clauses)) = items.split_first() else {
        return Err(ParseError::syntax(section.pos(), "operator without a name"));
    };
    let (mut pre, mut add, mut del, mut cost) = (None, None, None, None);
    for clause in clauses {
        let slot = match clause.head() {
            Some("pre") => &mut pre,
            Some("add") => &mut add,
            Some("del") => &mut del,
            Some("cost") => {
                let [value] = clause.tagged("cost")? else {
                    return Err(ParseError::syntax(clause.pos(), "expected `(cost NUMBER)`"));
                };
                if cost.replace(parse_number(value)?).is_some() {
                    return Err(ParseError::syntax(clause.pos(), "repeated cost clause"));
                }
                continue;
            }
            _ => return Err(ParseError::syntax(clause.pos(), "expected pre, add, del or cost")),
        };
        if slot.is_some() {
            return Err(ParseError::syntax(clause.pos(), "repeated clause"));
        }
        *slot = Some(atoms(domain, &clause.list()?[1..])?);
    }
    let op = PrimitiveOperator::new(
        name.symbol()?,
        pre.unwrap_or_default(),
        add.unwrap_or_default(),
        del.unwrap_or_default(),
    )
    .with_cost(cost.unwrap_or(1.0));
    domain.add_operator(op).map_err(|e| ParseError::from_model(name.pos(), e))?;
    Ok(())
}

fn parse_method(domain: &mut Domain, section: &Sexpr) -> Result<(), ParseError> {
    let items = section.tagged("method")?;
    let [name, head, rest @ ..] = items else {
        return Err(ParseError::syntax(section.pos(), "expected `(method NAME COMPOUND (tasks ...) ...)`"));
    };
    let head_name = head.symbol()?;
    let Some(Task::Compound(head_id)) = domain.task(head_name) else {
        return Err(ParseError::undeclared(head.pos(), "compound task", head_name));
    };
    let (mut tasks, mut order, mut cost) = (None, None, None);
    for clause in rest {
        let slot = match clause.head() {
            Some("tasks") => &mut tasks,
            Some("order") => &mut order,
            Some("cost") => &mut cost,
            _ => return Err(ParseError::syntax(clause.pos(), "expected tasks, order or cost")),
        };
        if slot.replace(clause).is_some() {
            return Err(ParseError::syntax(clause.pos(), "repeated clause"));
        }
    }
    let Some(tasks) = tasks else {
        return Err(ParseError::syntax(section.pos(), "method without a tasks clause"));
    };
    let network = parse_network(domain, tasks, order)?;
    let mut method = Method::new(name.symbol()?, head_id, network);
    if let Some(cost) = cost {
        let [value] = cost.tagged("cost")? else {
            return Err(ParseError::syntax(cost.pos(), "expected `(cost NUMBER)`"));
        };
        method = method.with_cost(parse_number(value)?);
    }
    domain.add_method(method).map_err(|e| ParseError::from_model(name.pos(), e))?;
    Ok(())
}

/// Serializes every atom, operator, compound and attached method in id
/// order. Variants and reserved marks are not part of the format.
pub fn write_domain(domain: &Domain) -> String {
    let mut out = String::from("(domain\n");
    out += &format!("  (atoms {})\n", domain.atom_names().join(" ")).replace("(atoms )", "(atoms)");
    let names = |ids: &[AtomId]| ids.iter().map(|a| format!(" {}", domain.atom_name(*a))).collect::<String>();
    for (_, op) in domain.operators() {
        out += &format!(
            "  (operator {} (pre{}) (add{}) (del{}) (cost {}))\n",
            op.name,
            names(&op.pre),
            names(&op.add),
            names(&op.del),
            op.cost
        );
    }
    for c in 0..domain.compound_count() {
        out += &format!("  (compound {})\n", domain.compound_name(crate::model::CompoundId(c as u32)));
    }
    for (id, m) in domain.methods() {
        if !domain.methods_for(m.head).contains(&id) {
            continue;
        }
        out += &format!(
            "  (method {} {} {} (cost {}))\n",
            m.name,
            domain.compound_name(m.head),
            write_network(domain, &m.subnetwork),
            m.cost
        );
    }
    out.push_str(")\n");
    out
}
