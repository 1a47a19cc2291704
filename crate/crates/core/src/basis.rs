//! Polynomial-size bases for I-map testing.
//!
//! A basis of a graph is a subset of its dependency model whose membership
//! in `M(P)` implies the whole model is in `M(P)`. Three constructions are
//! provided behind [`BasisBuilder`]:
//!
//! * [`RecursiveBasis`] for dags: one statement per vertex.
//! * [`TreeBasisBt`] for E-trees: a "sigma" statement per child edge and a
//!   "gamma" statement per non-child edge of every vertex, at most `n^2`.
//! * [`TreeBasisBs`] for E-trees: the same sigma statements, with gammas
//!   replaced by smaller marginal statements between the branches at `x`.

use crate::graph::{EDag, ETree, GraphError};
use crate::oracle::{ci_residual, JointTable, OracleError};
use crate::separation::{recursive_basis, SeparationError};
use crate::statement::{Statement, StatementSet};
use crate::varset::{VarId, VarSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BasisError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Where a basis statement came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Per-vertex statement of a recursive basis.
    Vertex(VarId),
    /// `I(S_i, {x}, U \ S_i \ {x})` for the child `neighbor` of `vertex`.
    Sigma { vertex: VarId, neighbor: VarId },
    /// `I(Q_i, 0, R_i)` for the non-child `neighbor` of `vertex`.
    Gamma { vertex: VarId, neighbor: VarId },
    /// `I(Q_i, 0, union of the other Q_j)` at `vertex`.
    Branch { vertex: VarId, neighbor: VarId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisEntry {
    pub statement: Statement,
    pub provenance: Provenance,
}

/// Duplicate-free basis statements with their provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Basis {
    entries: Vec<BasisEntry>,
    seen: StatementSet,
}

impl Basis {
    fn push(&mut self, statement: Statement, provenance: Provenance) {
        if self.seen.insert(statement) {
            self.entries.push(BasisEntry {
                statement,
                provenance,
            });
        }
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn statements(&self) -> &StatementSet {
        &self.seen
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Membership tests needed to check the basis against a distribution.
    pub fn membership_test_count(&self) -> usize {
        self.len()
    }
}

/// A basis construction selectable by name.
pub trait BasisBuilder: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(&self, g: &EDag) -> Result<Basis, BasisError>;
}

pub struct RecursiveBasis;

impl BasisBuilder for RecursiveBasis {
    fn name(&self) -> &'static str {
        "recursive"
    }

    fn build(&self, g: &EDag) -> Result<Basis, BasisError> {
        let mut out = Basis::default();
        for s in &recursive_basis(g)? {
            let v = s.x.first().expect("statements have a nonempty X");
            out.push(*s, Provenance::Vertex(v));
        }
        Ok(out)
    }
}

pub struct TreeBasisBt;

impl BasisBuilder for TreeBasisBt {
    fn name(&self) -> &'static str {
        "bt"
    }

    fn build(&self, g: &EDag) -> Result<Basis, BasisError> {
        Ok(build_bt(&ETree::new(g.clone())?))
    }
}

pub struct TreeBasisBs;

impl BasisBuilder for TreeBasisBs {
    fn name(&self) -> &'static str {
        "bs"
    }

    fn build(&self, g: &EDag) -> Result<Basis, BasisError> {
        Ok(build_bs(&ETree::new(g.clone())?))
    }
}

/// Neighbors of `x` split into children (`x -> s`) and the rest.
fn split_neighbors(t: &ETree, x: VarId) -> (VarSet, VarSet) {
    let children = t.children(x);
    (children, t.neighbors(x) - children)
}

fn push_if_valid(out: &mut Basis, x: VarSet, z: VarSet, y: VarSet, provenance: Provenance) {
    if !x.is_empty() && !y.is_empty() {
        out.push(Statement::new_unchecked(x, z, y), provenance);
    }
}

fn push_sigmas(t: &ETree, x: VarId, out: &mut Basis) {
    let all = t.vertices();
    let (children, _) = split_neighbors(t, x);
    for s in children {
        let branch = t.branch(x, s);
        push_if_valid(
            out,
            branch,
            VarSet::singleton(x),
            all - branch - VarSet::singleton(x),
            Provenance::Sigma { vertex: x, neighbor: s },
        );
    }
}

/// Sigma statements for child edges and gamma statements for the other
/// edges of every vertex.
pub fn build_bt(t: &ETree) -> Basis {
    let all = t.vertices();
    let mut out = Basis::default();
    for x in all {
        push_sigmas(t, x, &mut out);
        let below = t.descendants_of_set(VarSet::singleton(x));
        let (_, others) = split_neighbors(t, x);
        for q in others {
            let branch = t.branch(x, q);
            push_if_valid(
                &mut out,
                branch,
                VarSet::EMPTY,
                all - below - branch,
                Provenance::Gamma { vertex: x, neighbor: q },
            );
        }
    }
    out
}

/// Sigma statements plus `I(Q_i, 0, union of the other Q_j)` at every vertex.
pub fn build_bs(t: &ETree) -> Basis {
    let mut out = Basis::default();
    for x in t.vertices() {
        push_sigmas(t, x, &mut out);
        let (_, others) = split_neighbors(t, x);
        let branches: Vec<(VarId, VarSet)> = others.iter().map(|q| (q, t.branch(x, q))).collect();
        for (i, &(q, branch)) in branches.iter().enumerate() {
            let rest = branches
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(VarSet::EMPTY, |acc, (_, &(_, b))| acc | b);
            push_if_valid(
                &mut out,
                branch,
                VarSet::EMPTY,
                rest,
                Provenance::Branch { vertex: x, neighbor: q },
            );
        }
    }
    out
}

/// A statement that failed a membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Failure {
    pub statement: Statement,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Imap,
    /// Failing basis statements in canonical order; the first one is the
    /// witness.
    NotImap(Vec<Failure>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImapReport {
    pub verdict: Verdict,
    pub tests: usize,
}

impl ImapReport {
    pub fn is_imap(&self) -> bool {
        self.verdict == Verdict::Imap
    }

    pub fn witness(&self) -> Option<&Failure> {
        match &self.verdict {
            Verdict::Imap => None,
            Verdict::NotImap(f) => f.first(),
        }
    }
}

/// Checks every statement of `build_bt(t)` against `p`, stopping at the
/// first failure unless `collect_all` is set.
///
/// Statements are tested in canonical order over the tree's variable ids,
/// and variables are matched to the table by name. Returned statements use
/// the tree's ids.
pub fn verify_etree_imap(
    t: &ETree,
    p: &JointTable,
    tol: f64,
    collect_all: bool,
) -> Result<ImapReport, BasisError> {
    let map = p.align(t.universe())?;
    let basis = build_bt(t);
    let mut failures = Vec::new();
    let mut tests = 0;
    for s in basis.statements() {
        tests += 1;
        let residual = ci_residual(p, &s.remap(&map))?;
        if residual > tol {
            failures.push(Failure {
                statement: *s,
                residual,
            });
            if !collect_all {
                break;
            }
        }
    }
    let verdict = if failures.is_empty() {
        Verdict::Imap
    } else {
        Verdict::NotImap(failures)
    };
    Ok(ImapReport { verdict, tests })
}
