use std::collections::BTreeSet;

/// Interned ground atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

/// A set of true atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(BTreeSet<AtomId>);

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(&atom)
    }

    pub fn contains_all(&self, atoms: &[AtomId]) -> bool {
        atoms.iter().all(|a| self.0.contains(a))
    }

    pub fn insert(&mut self, atom: AtomId) -> bool {
        self.0.insert(atom)
    }

    pub fn remove(&mut self, atom: AtomId) -> bool {
        self.0.remove(&atom)
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<AtomId> for State {
    fn from_iter<I: IntoIterator<Item = AtomId>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}
