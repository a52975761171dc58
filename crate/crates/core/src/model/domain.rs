use std::collections::{BTreeSet, HashMap};

use super::network::{Task, TaskNetwork};
use super::state::{AtomId, State};
use crate::error::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompoundId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodId(pub u32);

/// STRIPS-style primitive operator. Atom lists are kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveOperator {
    pub name: String,
    pub pre: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
    pub cost: f64,
}

impl PrimitiveOperator {
    pub fn new(
        name: impl Into<String>,
        pre: impl IntoIterator<Item = AtomId>,
        add: impl IntoIterator<Item = AtomId>,
        del: impl IntoIterator<Item = AtomId>,
    ) -> Self {
        let norm = |atoms: BTreeSet<AtomId>| atoms.into_iter().collect::<Vec<_>>();
        PrimitiveOperator {
            name: name.into(),
            pre: norm(pre.into_iter().collect()),
            add: norm(add.into_iter().collect()),
            del: norm(del.into_iter().collect()),
            cost: 1.0,
        }
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        state.contains_all(&self.pre)
    }

    /// `(s \ del) ∪ add`; deletes are applied before adds.
    pub fn apply(&self, state: &State) -> Result<State, ModelError> {
        if !self.is_applicable(state) {
            return Err(ModelError::NotApplicable(self.name.clone()));
        }
        Ok(self.apply_unchecked(state))
    }

    pub(crate) fn apply_unchecked(&self, state: &State) -> State {
        let mut next = state.clone();
        for atom in &self.del {
            next.remove(*atom);
        }
        for atom in &self.add {
            next.insert(*atom);
        }
        next
    }
}

/// Decomposition rule for a compound task.
#[derive(Clone, Debug, PartialEq)]
pub struct Method {
    pub name: String,
    pub head: CompoundId,
    pub subnetwork: TaskNetwork,
    pub cost: f64,
}

impl Method {
    /// Builds a method whose cost defaults to its subtask count.
    pub fn new(name: impl Into<String>, head: CompoundId, subnetwork: TaskNetwork) -> Self {
        let cost = subnetwork.len() as f64;
        Method { name: name.into(), head, subnetwork, cost }
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }
}

/// Ground HTN domain.
///
/// Primitive and compound task symbols share one namespace; atoms and method
/// names each have their own. Ids are dense indices in declaration order.
///
/// Two extensions serve the observation compilation: an operator can list
/// *variants* (other operators allowed to realize a node labeled with it), and
/// operators can be *reserved*, which excludes them from task insertion.
#[derive(Clone, Debug, Default)]
pub struct Domain {
    atoms: Vec<String>,
    operators: Vec<PrimitiveOperator>,
    compounds: Vec<String>,
    methods: Vec<Method>,
    methods_by_head: Vec<Vec<MethodId>>,
    variants: Vec<Vec<OpId>>,
    reserved: BTreeSet<OpId>,
    atom_index: HashMap<String, AtomId>,
    task_index: HashMap<String, Task>,
    method_index: HashMap<String, MethodId>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
            && self.operators == other.operators
            && self.compounds == other.compounds
            && self.methods == other.methods
            && self.methods_by_head == other.methods_by_head
            && self.variants == other.variants
            && self.reserved == other.reserved
    }
}

impl Domain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, name: impl Into<String>) -> Result<AtomId, ModelError> {
        let name = name.into();
        if self.atom_index.contains_key(&name) {
            return Err(ModelError::Duplicate(name));
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atom_index.insert(name.clone(), id);
        self.atoms.push(name);
        Ok(id)
    }

    pub fn add_operator(&mut self, op: PrimitiveOperator) -> Result<OpId, ModelError> {
        if self.task_index.contains_key(&op.name) {
            return Err(ModelError::Duplicate(op.name));
        }
        for atom in op.pre.iter().chain(&op.add).chain(&op.del) {
            if atom.0 as usize >= self.atoms.len() {
                return Err(ModelError::Undeclared { kind: "atom", name: format!("#{}", atom.0) });
            }
        }
        if !(op.cost >= 0.0 && op.cost.is_finite()) {
            return Err(ModelError::InvalidExecution(format!("operator `{}` has invalid cost", op.name)));
        }
        let id = OpId(self.operators.len() as u32);
        self.task_index.insert(op.name.clone(), Task::Primitive(id));
        self.operators.push(op);
        self.variants.push(Vec::new());
        Ok(id)
    }

    pub fn add_compound(&mut self, name: impl Into<String>) -> Result<CompoundId, ModelError> {
        let name = name.into();
        if self.task_index.contains_key(&name) {
            return Err(ModelError::Duplicate(name));
        }
        let id = CompoundId(self.compounds.len() as u32);
        self.task_index.insert(name.clone(), Task::Compound(id));
        self.compounds.push(name);
        self.methods_by_head.push(Vec::new());
        Ok(id)
    }

    pub fn add_method(&mut self, method: Method) -> Result<MethodId, ModelError> {
        if self.method_index.contains_key(&method.name) {
            return Err(ModelError::Duplicate(method.name));
        }
        if method.head.0 as usize >= self.compounds.len() {
            return Err(ModelError::Undeclared { kind: "compound task", name: format!("#{}", method.head.0) });
        }
        for (_, task) in method.subnetwork.nodes() {
            self.check_task(task)?;
        }
        if !(method.cost >= 0.0 && method.cost.is_finite()) {
            return Err(ModelError::InvalidExecution(format!("method `{}` has invalid cost", method.name)));
        }
        let id = MethodId(self.methods.len() as u32);
        self.method_index.insert(method.name.clone(), id);
        self.methods_by_head[method.head.0 as usize].push(id);
        self.methods.push(method);
        Ok(id)
    }

    /// Detaches a method from its head. The method keeps its id but is no
    /// longer offered for decomposition.
    pub fn remove_method(&mut self, id: MethodId) {
        if let Some(method) = self.methods.get(id.0 as usize) {
            self.methods_by_head[method.head.0 as usize].retain(|m| *m != id);
        }
    }

    /// Allows nodes labeled `base` to be executed by `variant` instead.
    pub fn add_variant(&mut self, base: OpId, variant: OpId) {
        self.variants[base.0 as usize].push(variant);
    }

    pub fn reserve(&mut self, op: OpId) {
        self.reserved.insert(op);
    }

    pub fn check_task(&self, task: Task) -> Result<(), ModelError> {
        let ok = match task {
            Task::Primitive(op) => (op.0 as usize) < self.operators.len(),
            Task::Compound(c) => (c.0 as usize) < self.compounds.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::Undeclared { kind: "task", name: format!("{task:?}") })
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_name(&self, id: AtomId) -> &str {
        &self.atoms[id.0 as usize]
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atom_index.get(name).copied()
    }

    pub fn atom_names(&self) -> &[String] {
        &self.atoms
    }

    pub fn operator_count(&self) -> usize {
        self.operators.len()
    }

    pub fn operator(&self, id: OpId) -> &PrimitiveOperator {
        &self.operators[id.0 as usize]
    }

    /// Adds `atom` to the precondition of `op`.
    pub(crate) fn require(&mut self, op: OpId, atom: AtomId) {
        let pre = &mut self.operators[op.0 as usize].pre;
        if let Err(i) = pre.binary_search(&atom) {
            pre.insert(i, atom);
        }
    }

    pub fn operators(&self) -> impl Iterator<Item = (OpId, &PrimitiveOperator)> {
        self.operators.iter().enumerate().map(|(i, op)| (OpId(i as u32), op))
    }

    pub fn op_id(&self, name: &str) -> Option<OpId> {
        match self.task_index.get(name) {
            Some(Task::Primitive(op)) => Some(*op),
            _ => None,
        }
    }

    pub fn variants(&self, op: OpId) -> &[OpId] {
        &self.variants[op.0 as usize]
    }

    pub fn is_reserved(&self, op: OpId) -> bool {
        self.reserved.contains(&op)
    }

    /// Operators available for task insertion, in id order.
    pub fn insertable_operators(&self) -> Vec<OpId> {
        (0..self.operators.len() as u32).map(OpId).filter(|op| !self.reserved.contains(op)).collect()
    }

    pub fn compound_count(&self) -> usize {
        self.compounds.len()
    }

    pub fn compound_name(&self, id: CompoundId) -> &str {
        &self.compounds[id.0 as usize]
    }

    pub fn compound_id(&self, name: &str) -> Option<CompoundId> {
        match self.task_index.get(name) {
            Some(Task::Compound(c)) => Some(*c),
            _ => None,
        }
    }

    pub fn task(&self, name: &str) -> Option<Task> {
        self.task_index.get(name).copied()
    }

    pub fn task_name(&self, task: Task) -> &str {
        match task {
            Task::Primitive(op) => &self.operators[op.0 as usize].name,
            Task::Compound(c) => &self.compounds[c.0 as usize],
        }
    }

    pub fn method(&self, id: MethodId) -> &Method {
        &self.methods[id.0 as usize]
    }

    pub fn method_id(&self, name: &str) -> Option<MethodId> {
        self.method_index.get(name).copied()
    }

    /// All declared methods, including detached ones.
    pub fn methods(&self) -> impl Iterator<Item = (MethodId, &Method)> {
        self.methods.iter().enumerate().map(|(i, m)| (MethodId(i as u32), m))
    }

    /// Methods currently offered for `head`, in declaration order.
    pub fn methods_for(&self, head: CompoundId) -> &[MethodId] {
        &self.methods_by_head[head.0 as usize]
    }

    pub fn state_names(&self, state: &State) -> Vec<&str> {
        state.atoms().map(|a| self.atom_name(a)).collect()
    }

    pub fn action_names(&self, actions: &[OpId]) -> Vec<&str> {
        actions.iter().map(|op| self.operator(*op).name.as_str()).collect()
    }
}
