//! Independence statements `I(X, Z, Y)` and sets of them.

use std::collections::BTreeSet;
use std::fmt;

use crate::varset::{Universe, VarId, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatementError {
    #[error("the first component of a statement must be nonempty")]
    EmptyX,
    #[error("the third component of a statement must be nonempty")]
    EmptyY,
    #[error("statement components overlap")]
    NotDisjoint,
    #[error("statement mentions variable #{0} outside a universe of {1}")]
    UnknownVariable(usize, usize),
}

/// `I(X, Z, Y)`: X is independent of Y given Z.
///
/// Field order matches the printed order of the triple, so the derived
/// ordering sorts by X, then Z, then Y.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Statement {
    pub x: VarSet,
    pub z: VarSet,
    pub y: VarSet,
}

impl Statement {
    pub fn new(x: VarSet, z: VarSet, y: VarSet) -> Result<Self, StatementError> {
        let s = Statement { x, z, y };
        s.check()?;
        Ok(s)
    }

    /// Builds a statement without checking it. Callers must guarantee the
    /// components are disjoint and X, Y are nonempty.
    pub(crate) const fn new_unchecked(x: VarSet, z: VarSet, y: VarSet) -> Self {
        Statement { x, z, y }
    }

    pub fn marginal(x: VarSet, y: VarSet) -> Result<Self, StatementError> {
        Statement::new(x, VarSet::EMPTY, y)
    }

    pub fn simple(a: VarId, z: VarSet, b: VarId) -> Result<Self, StatementError> {
        Statement::new(VarSet::singleton(a), z, VarSet::singleton(b))
    }

    pub fn check(&self) -> Result<(), StatementError> {
        if self.x.is_empty() {
            return Err(StatementError::EmptyX);
        }
        if self.y.is_empty() {
            return Err(StatementError::EmptyY);
        }
        if !self.x.is_disjoint(self.y) || !self.x.is_disjoint(self.z) || !self.y.is_disjoint(self.z)
        {
            return Err(StatementError::NotDisjoint);
        }
        Ok(())
    }

    /// Checks validity and that every variable lies in `0..n`.
    pub fn check_within(&self, n: usize) -> Result<(), StatementError> {
        self.check()?;
        if let Some(v) = (self.vars() - VarSet::full(n)).first() {
            return Err(StatementError::UnknownVariable(v.index(), n));
        }
        Ok(())
    }

    pub fn vars(&self) -> VarSet {
        self.x | self.y | self.z
    }

    pub fn is_marginal(&self) -> bool {
        self.z.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.x.len() == 1 && self.y.len() == 1
    }

    /// `I(Y, Z, X)`.
    pub fn symmetric(&self) -> Statement {
        Statement {
            x: self.y,
            z: self.z,
            y: self.x,
        }
    }

    /// Renames variables through `map`, where `map[old] = new`.
    pub fn remap(&self, map: &[VarId]) -> Statement {
        let f = |s: VarSet| s.iter().map(|v| map[v.index()]).collect();
        Statement {
            x: f(self.x),
            z: f(self.z),
            y: f(self.y),
        }
    }

    pub fn display<'a>(&'a self, universe: &'a Universe) -> DisplayStatement<'a> {
        DisplayStatement {
            statement: self,
            universe,
        }
    }
}

/// Renders a statement as `I(X ; Y)` or `I(X ; Y | Z)`.
pub struct DisplayStatement<'a> {
    statement: &'a Statement,
    universe: &'a Universe,
}

impl fmt::Display for DisplayStatement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = self.universe;
        let s = self.statement;
        write!(f, "I({} ; {}", u.format_set(s.x), u.format_set(s.y))?;
        if !s.z.is_empty() {
            write!(f, " | {}", u.format_set(s.z))?;
        }
        f.write_str(")")
    }
}

/// Duplicate-free, canonically ordered set of statements.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct StatementSet(BTreeSet<Statement>);

impl StatementSet {
    pub fn new() -> Self {
        StatementSet(BTreeSet::new())
    }

    pub fn insert(&mut self, s: Statement) -> bool {
        self.0.insert(s)
    }

    pub fn contains(&self, s: &Statement) -> bool {
        self.0.contains(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Statement> + '_ {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &StatementSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &StatementSet) -> StatementSet {
        StatementSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &StatementSet) -> StatementSet {
        StatementSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn remove(&mut self, s: &Statement) -> bool {
        self.0.remove(s)
    }

    pub fn retain(&mut self, f: impl FnMut(&Statement) -> bool) {
        self.0.retain(f)
    }

    /// Adds the symmetric image of every member.
    pub fn with_symmetric_images(&self) -> StatementSet {
        self.iter().flat_map(|s| [*s, s.symmetric()]).collect()
    }

    pub fn filter(&self, mut f: impl FnMut(&Statement) -> bool) -> StatementSet {
        self.iter().filter(|s| f(s)).copied().collect()
    }
}

impl fmt::Debug for StatementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.0).finish()
    }
}

impl FromIterator<Statement> for StatementSet {
    fn from_iter<I: IntoIterator<Item = Statement>>(iter: I) -> Self {
        StatementSet(iter.into_iter().collect())
    }
}

impl Extend<Statement> for StatementSet {
    fn extend<I: IntoIterator<Item = Statement>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl IntoIterator for StatementSet {
    type Item = Statement;
    type IntoIter = std::collections::btree_set::IntoIter<Statement>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a StatementSet {
    type Item = &'a Statement;
    type IntoIter = std::collections::btree_set::Iter<'a, Statement>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Every valid statement over `n` variables, in canonical order.
///
/// Walks all `4^n` assignments of variables to X, Z, Y or "unused".
pub fn all_statements(n: usize) -> impl Iterator<Item = Statement> {
    let all = VarSet::full(n);
    all.nonempty_subsets().flat_map(move |x| {
        let rest = all - x;
        rest.subsets().flat_map(move |z| {
            (rest - z)
                .nonempty_subsets()
                .map(move |y| Statement::new_unchecked(x, z, y))
        })
    })
}
