//! Dense variable identifiers and 64-bit variable sets.

use std::collections::HashMap;
use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

/// Maximum number of variables a [`VarSet`] can hold.
pub const MAX_VARS: usize = 64;

/// Index of a variable in an ordered [`Universe`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

impl VarId {
    pub fn new(index: usize) -> Self {
        assert!(index < MAX_VARS, "variable index {index} exceeds {MAX_VARS}");
        VarId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VarId {
    fn from(index: usize) -> Self {
        VarId::new(index)
    }
}

/// A finite set of [`VarId`]s stored as a bitmask.
///
/// Ordering compares the raw masks, which gives a total order suitable for
/// canonical sorting but carries no set-theoretic meaning.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: VarId) -> Self {
        VarSet(1 << v.index())
    }

    /// The set `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARS);
        if n == MAX_VARS {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn contains(self, v: VarId) -> bool {
        self.0 >> v.index() & 1 == 1
    }

    pub fn insert(&mut self, v: VarId) -> bool {
        let fresh = !self.contains(v);
        self.0 |= 1 << v.index();
        fresh
    }

    pub fn remove(&mut self, v: VarId) -> bool {
        let present = self.contains(v);
        self.0 &= !(1 << v.index());
        present
    }

    pub fn with(mut self, v: VarId) -> Self {
        self.insert(v);
        self
    }

    pub fn without(mut self, v: VarId) -> Self {
        self.remove(v);
        self
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<VarId> {
        (self.0 != 0).then(|| VarId(self.0.trailing_zeros()))
    }

    /// Members in increasing order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Every subset of `self`, including the empty set and `self`.
    ///
    /// Subsets come out in increasing mask order, starting at the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Subsets that are neither empty nor equal to `self`.
    pub fn proper_nonempty_subsets(self) -> impl Iterator<Item = VarSet> {
        self.subsets().filter(move |s| !s.is_empty() && *s != self)
    }

    pub fn nonempty_subsets(self) -> impl Iterator<Item = VarSet> {
        self.subsets().filter(|s| !s.is_empty())
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.index())).finish()
    }
}

impl BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, rhs: VarSet) -> VarSet {
        VarSet(self.0 | rhs.0)
    }
}

impl BitAnd for VarSet {
    type Output = VarSet;
    fn bitand(self, rhs: VarSet) -> VarSet {
        VarSet(self.0 & rhs.0)
    }
}

impl Sub for VarSet {
    type Output = VarSet;
    fn sub(self, rhs: VarSet) -> VarSet {
        VarSet(self.0 & !rhs.0)
    }
}

impl Not for VarSet {
    type Output = VarSet;
    fn not(self) -> VarSet {
        VarSet(!self.0)
    }
}

impl FromIterator<VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl IntoIterator for VarSet {
    type Item = VarId;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = VarId;

    fn next(&mut self) -> Option<VarId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(VarId(tz))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = VarSet;

    fn next(&mut self) -> Option<VarSet> {
        let cur = self.next?;
        // Carry-propagating increment restricted to the bits of `mask`.
        let succ = (cur | !self.mask).wrapping_add(1) & self.mask;
        self.next = (succ != 0).then_some(succ);
        Some(VarSet(cur))
    }
}

/// Ordered list of variable names; position defines the [`VarId`].
#[derive(Clone, PartialEq, Eq)]
pub struct Universe {
    names: Vec<String>,
    index: HashMap<String, VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UniverseError {
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("{0} variables exceed the limit of {MAX_VARS}")]
    TooManyVariables(usize),
}

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Self, UniverseError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_VARS {
            return Err(UniverseError::TooManyVariables(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(UniverseError::InvalidName(name.clone()));
            }
            if index.insert(name.clone(), VarId::new(i)).is_some() {
                return Err(UniverseError::DuplicateName(name.clone()));
            }
        }
        Ok(Universe { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len()).map(VarId::new)
    }

    pub fn all(&self) -> VarSet {
        VarSet::full(self.names.len())
    }

    /// Comma separated names of `set`, in universe order.
    pub fn format_set(&self, set: VarSet) -> String {
        set.iter().map(|v| self.name(v)).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.names).finish()
    }
}

/// Names are non-empty and avoid the characters the text formats reserve.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, ',' | ';' | '|' | '(' | ')' | '#' | ':'))
        && !matches!(name, "->" | "<->" | "vars")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> VarSet {
        ids.iter().map(|&i| VarId::new(i)).collect()
    }

    #[test]
    fn set_algebra() {
        let a = set(&[0, 2, 5]);
        let b = set(&[2, 3]);
        assert_eq!(a | b, set(&[0, 2, 3, 5]));
        assert_eq!(a & b, set(&[2]));
        assert_eq!(a - b, set(&[0, 5]));
        assert!(!a.is_disjoint(b));
        assert!(set(&[2]).is_subset(a));
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().map(VarId::index).collect::<Vec<_>>(), vec![0, 2, 5]);
        assert_eq!(a.first(), Some(VarId::new(0)));
        assert_eq!(VarSet::EMPTY.first(), None);
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let s = set(&[1, 4, 6]);
        let subs: Vec<VarSet> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], VarSet::EMPTY);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        let mut dedup = subs.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 8);
        assert_eq!(VarSet::EMPTY.subsets().count(), 1);
        assert_eq!(s.proper_nonempty_subsets().count(), 6);
    }

    #[test]
    fn full_sets() {
        assert_eq!(VarSet::full(0), VarSet::EMPTY);
        assert_eq!(VarSet::full(3), set(&[0, 1, 2]));
        assert_eq!(VarSet::full(64).len(), 64);
        assert!(VarSet::full(64).contains(VarId::new(63)));
    }

    #[test]
    fn universe_rejects_duplicates_and_bad_names() {
        assert!(Universe::new(["a", "b"]).is_ok());
        assert_eq!(
            Universe::new(["a", "a"]),
            Err(UniverseError::DuplicateName("a".into()))
        );
        assert!(matches!(
            Universe::new(["a,b"]),
            Err(UniverseError::InvalidName(_))
        ));
        let u = Universe::new(["x", "y", "z"]).unwrap();
        assert_eq!(u.lookup("y"), Some(VarId::new(1)));
        assert_eq!(u.format_set(set(&[0, 2])), "x,z");
    }
}
