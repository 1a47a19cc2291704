//! Named strategies selectable at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::basis::{BasisBuilder, RecursiveBasis, TreeBasisBs, TreeBasisBt};
use crate::graphoid::AxiomSet;
use crate::separation::{Reachability, SeparationEngine, TrailEnumeration};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{name}`; expected one of: {known}")]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
    pub known: String,
}

/// A name-keyed table of shared values.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    items: BTreeMap<&'static str, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn empty(kind: &'static str) -> Self {
        Registry {
            kind,
            items: BTreeMap::new(),
        }
    }

    /// Adds or replaces an entry.
    pub fn register(&mut self, name: &'static str, item: Arc<T>) {
        self.items.insert(name, item);
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>, UnknownName> {
        self.items.get(name).cloned().ok_or_else(|| UnknownName {
            kind: self.kind,
            name: name.to_string(),
            known: self.names().collect::<Vec<_>>().join(", "),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.items.keys().copied()
    }
}

impl Registry<dyn SeparationEngine> {
    pub fn engines() -> Self {
        let mut r = Registry::empty("separation engine");
        for e in [
            Arc::new(Reachability) as Arc<dyn SeparationEngine>,
            Arc::new(TrailEnumeration),
        ] {
            r.register(e.name(), e);
        }
        r
    }
}

impl Registry<dyn BasisBuilder> {
    pub fn bases() -> Self {
        let mut r = Registry::empty("basis");
        for b in [
            Arc::new(TreeBasisBt) as Arc<dyn BasisBuilder>,
            Arc::new(TreeBasisBs),
            Arc::new(RecursiveBasis),
        ] {
            r.register(b.name(), b);
        }
        r
    }
}

impl Registry<AxiomSet> {
    pub fn axioms() -> Self {
        let mut r = Registry::empty("axiom set");
        for a in [
            AxiomSet::semi_graphoid(),
            AxiomSet::positive(),
            AxiomSet::marginal(),
            AxiomSet::sdw(),
        ] {
            r.register(a.name(), Arc::new(a));
        }
        r
    }
}
