//! Closures of statement sets under graphoid-style axioms.
//!
//! [`closure`] computes the least fixpoint of a statement set under an
//! [`AxiomSet`] with a worklist. Every derived statement remembers the rule
//! and premises that produced it first, so [`Closure::trace`] can replay a
//! derivation.

pub mod rules;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::statement::{Statement, StatementSet};
use crate::varset::VarSet;

pub use rules::{Inference, Known, Rule};

/// Default cap on the number of statements a closure may hold.
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error("closure exceeded the budget of {budget} statements ({derived} derived so far)")]
    BudgetExceeded { budget: usize, derived: usize },
    #[error("invalid input statement: {0}")]
    InvalidStatement(#[from] crate::statement::StatementError),
}

/// A named collection of inference rules.
#[derive(Clone)]
pub struct AxiomSet {
    name: &'static str,
    rules: Vec<Arc<dyn Rule>>,
}

impl AxiomSet {
    pub fn new(name: &'static str, rules: Vec<Arc<dyn Rule>>) -> Self {
        AxiomSet { name, rules }
    }

    /// Symmetry, Decomposition, Contraction and Weak-union.
    pub fn semi_graphoid() -> Self {
        AxiomSet::new(
            "semi-graphoid",
            vec![
                Arc::new(rules::Symmetry),
                Arc::new(rules::Decomposition),
                Arc::new(rules::Contraction),
                Arc::new(rules::WeakUnion),
            ],
        )
    }

    /// The semi-graphoid axioms plus Intersection.
    pub fn positive() -> Self {
        let mut ax = AxiomSet::semi_graphoid();
        ax.name = "positive";
        ax.rules.push(Arc::new(rules::Intersection));
        ax
    }

    /// M-symmetry, M-decomposition and M-mixing; these only touch
    /// statements with an empty conditioning set.
    pub fn marginal() -> Self {
        AxiomSet::new(
            "marginal",
            vec![
                Arc::new(rules::MSymmetry),
                Arc::new(rules::MDecomposition),
                Arc::new(rules::MMixing),
            ],
        )
    }

    /// Symmetry, Decomposition and Weak-union.
    pub fn sdw() -> Self {
        AxiomSet::new(
            "sdw",
            vec![
                Arc::new(rules::Symmetry),
                Arc::new(rules::Decomposition),
                Arc::new(rules::WeakUnion),
            ],
        )
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn rules(&self) -> impl Iterator<Item = &dyn Rule> {
        self.rules.iter().map(|r| r.as_ref())
    }
}

impl fmt::Debug for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxiomSet")
            .field("name", &self.name)
            .field("rules", &self.rules.iter().map(|r| r.name()).collect::<Vec<_>>())
            .finish()
    }
}

/// How a statement entered the closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Given,
    Derived {
        rule: &'static str,
        premises: Vec<usize>,
    },
}

/// One line of a derivation: statement `id` follows from `premises` by `rule`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub id: usize,
    pub statement: Statement,
    pub rule: Option<&'static str>,
    pub premises: Vec<usize>,
}

/// Result of [`closure`].
pub struct Closure {
    arena: Vec<Statement>,
    origins: Vec<Origin>,
    ids: HashMap<Statement, usize>,
    by_xz: HashMap<(VarSet, VarSet), Vec<VarSet>>,
}

impl Known for Closure {
    fn contains(&self, s: &Statement) -> bool {
        self.ids.contains_key(s)
    }

    fn third_components(&self, x: VarSet, z: VarSet) -> Vec<VarSet> {
        self.by_xz.get(&(x, z)).cloned().unwrap_or_default()
    }
}

impl Closure {
    fn empty() -> Self {
        Closure {
            arena: Vec::new(),
            origins: Vec::new(),
            ids: HashMap::new(),
            by_xz: HashMap::new(),
        }
    }

    fn push(&mut self, s: Statement, origin: Origin) -> bool {
        if self.ids.contains_key(&s) {
            return false;
        }
        self.ids.insert(s, self.arena.len());
        self.by_xz.entry((s.x, s.z)).or_default().push(s.y);
        self.arena.push(s);
        self.origins.push(origin);
        true
    }

    pub fn len(&self) -> usize {
        self.arena.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }

    pub fn statements(&self) -> StatementSet {
        self.arena.iter().copied().collect()
    }

    /// Derivation of `target` as a premise-first list of steps, or `None`
    /// if `target` is not in the closure.
    pub fn trace(&self, target: &Statement) -> Option<Vec<TraceStep>> {
        let root = *self.ids.get(target)?;
        let mut needed = vec![false; self.arena.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut needed[id], true) {
                continue;
            }
            if let Origin::Derived { premises, .. } = &self.origins[id] {
                stack.extend(premises.iter().copied());
            }
        }
        // Premises always precede their conclusions in the arena.
        Some(
            needed
                .iter()
                .enumerate()
                .filter(|(_, &n)| n)
                .map(|(id, _)| {
                    let (rule, premises) = match &self.origins[id] {
                        Origin::Given => (None, Vec::new()),
                        Origin::Derived { rule, premises } => (Some(*rule), premises.clone()),
                    };
                    TraceStep {
                        id,
                        statement: self.arena[id],
                        rule,
                        premises,
                    }
                })
                .collect(),
        )
    }
}

/// Least fixpoint of `given` under `axioms`, capped at `budget` statements.
pub fn closure<'a>(
    given: impl IntoIterator<Item = &'a Statement>,
    axioms: &AxiomSet,
    budget: usize,
) -> Result<Closure, ClosureError> {
    let mut state = Closure::empty();
    for s in given {
        s.check()?;
        state.push(*s, Origin::Given);
    }
    if state.len() > budget {
        return Err(ClosureError::BudgetExceeded {
            budget,
            derived: state.len(),
        });
    }
    let mut next = 0;
    let mut buf = Vec::new();
    while next < state.arena.len() {
        let s = state.arena[next];
        for rule in axioms.rules() {
            buf.clear();
            rule.apply(&s, &state, &mut buf);
            for inf in buf.drain(..) {
                let mut premises = vec![next];
                if let Some(p) = inf.partner {
                    premises.push(state.ids[&p]);
                }
                if state.push(
                    inf.conclusion,
                    Origin::Derived {
                        rule: rule.name(),
                        premises,
                    },
                ) && state.len() > budget
                {
                    return Err(ClosureError::BudgetExceeded {
                        budget,
                        derived: state.len(),
                    });
                }
            }
        }
        next += 1;
    }
    Ok(state)
}

/// Whether `target` is derivable from `given` under `axioms`; on success
/// the derivation is returned as well.
pub fn derives(
    given: &StatementSet,
    target: &Statement,
    axioms: &AxiomSet,
    budget: usize,
) -> Result<Option<Vec<TraceStep>>, ClosureError> {
    target.check()?;
    Ok(closure(given, axioms, budget)?.trace(target))
}

/// Simple statements derivable from `sigma` by Symmetry, Decomposition and
/// Weak-union.
pub fn simple_fragment(sigma: &Statement) -> StatementSet {
    // X and Y only shrink, so the SDW closure is tiny.
    closure([sigma], &AxiomSet::sdw(), usize::MAX)
        .expect("an unbounded budget cannot be exceeded")
        .statements()
        .filter(|s| s.is_simple())
}
