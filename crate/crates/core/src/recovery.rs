//! Learning an E-tree that represents a strictly positive distribution well.
//!
//! The pipeline:
//!
//! 1. reject distributions with a zero entry;
//! 2. build the skeleton from the complete graph, dropping `a - b` whenever
//!    `I(a, U \ {a,b}, b)` or `I(a, 0, b)` holds;
//! 3. fail unless the skeleton is a spanning tree;
//! 4. mark `b` as a required sink on every chain `a - b - c` with
//!    `I(a, 0, c)`;
//! 5. orient the tree so that exactly the required chains have sinks;
//! 6. check the result is an I-map that represents the distribution well.
//!
//! Every independence query is logged with its residual.

use std::fmt;

use crate::basis::{verify_etree_imap, BasisError};
use crate::graph::{EDag, ETree, Edge, GraphError};
use crate::oracle::{ci_residual, JointTable, OracleError};
use crate::statement::Statement;
use crate::varset::{Universe, VarId, VarSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("sink triple ({0}, {1}, {2}) is not a chain of the skeleton")]
    NotAChain(usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    NotPositive,
    NotTree,
    OrientationConflict,
    NotWellRepresented,
    NotImap,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::NotPositive => "NOT_POSITIVE",
            Stage::NotTree => "NOT_TREE",
            Stage::OrientationConflict => "ORIENTATION_CONFLICT",
            Stage::NotWellRepresented => "NOT_WELL_REPRESENTED",
            Stage::NotImap => "NOT_IMAP",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A full assignment with probability zero.
    ZeroRow(Vec<usize>),
    /// The skeleton that is not a spanning tree.
    Skeleton {
        edges: Vec<(VarId, VarId)>,
        components: usize,
    },
    /// A chain `a - b - c` whose constraints cannot be met.
    Triple(VarId, VarId, VarId),
    /// A statement and its residual.
    Statement(Statement, f64),
    /// A trek-connected pair that is marginally independent.
    Pair(VarId, VarId, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub stage: Stage,
    pub witness: Witness,
}

/// One logged independence query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub statement: Statement,
    pub holds: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOutcome {
    pub result: Result<ETree, Failure>,
    pub queries: Vec<Query>,
}

impl RecoveryOutcome {
    pub fn tree(&self) -> Option<&ETree> {
        self.result.as_ref().ok()
    }

    pub fn failure(&self) -> Option<&Failure> {
        self.result.as_ref().err()
    }
}

/// An undirected graph on the variables of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub universe: Universe,
    pub adjacency: Vec<VarSet>,
}

impl Skeleton {
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for a in self.universe.ids() {
            for b in self.adjacency[a.index()] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, v: VarId) -> VarSet {
        self.adjacency[v.index()]
    }

    pub fn components(&self) -> usize {
        let mut left = self.universe.all();
        let mut count = 0;
        while let Some(root) = left.first() {
            let mut comp = VarSet::singleton(root);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let next = frontier
                    .iter()
                    .fold(VarSet::EMPTY, |acc, v| acc | self.neighbors(v));
                frontier = next - comp;
                comp = comp | next;
            }
            left = left - comp;
            count += 1;
        }
        count
    }

    pub fn is_tree(&self) -> bool {
        !self.universe.is_empty()
            && self.edges().len() + 1 == self.universe.len()
            && self.components() == 1
    }
}

/// Skeleton plus the chains that must carry a sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkConstraint {
    pub skeleton: Skeleton,
    /// Triples `(a, b, c)` with `a < c`, both neighbors of `b`.
    pub required_sinks: Vec<(VarId, VarId, VarId)>,
}

struct Tester<'a> {
    p: &'a JointTable,
    tol: f64,
    log: Vec<Query>,
}

impl Tester<'_> {
    fn query(&mut self, s: Statement) -> Result<Query, OracleError> {
        let residual = ci_residual(self.p, &s)?;
        let q = Query {
            statement: s,
            holds: residual <= self.tol,
            residual,
        };
        self.log.push(q);
        Ok(q)
    }

    fn marginal(&mut self, a: VarId, b: VarId) -> Result<Query, OracleError> {
        self.query(Statement::new_unchecked(
            VarSet::singleton(a),
            VarSet::EMPTY,
            VarSet::singleton(b),
        ))
    }
}

fn skeleton_with(t: &mut Tester<'_>) -> Result<Skeleton, OracleError> {
    let all = t.p.universe().all();
    let n = t.p.len();
    let mut adjacency = vec![VarSet::EMPTY; n];
    for a in all {
        for b in all {
            if a >= b {
                continue;
            }
            let rest = all - VarSet::singleton(a) - VarSet::singleton(b);
            let cond = t.query(Statement::new_unchecked(
                VarSet::singleton(a),
                rest,
                VarSet::singleton(b),
            ))?;
            let keep = if cond.holds {
                false
            } else {
                !t.marginal(a, b)?.holds
            };
            if keep {
                adjacency[a.index()].insert(b);
                adjacency[b.index()].insert(a);
            }
        }
    }
    Ok(Skeleton {
        universe: t.p.universe().clone(),
        adjacency,
    })
}

/// Skeleton from the complete graph by the two removal rules.
pub fn build_skeleton(p: &JointTable, tol: f64) -> Result<Result<Skeleton, Failure>, RecoveryError> {
    if let Some(row) = p.first_zero_row() {
        return Ok(Err(Failure {
            stage: Stage::NotPositive,
            witness: Witness::ZeroRow(row),
        }));
    }
    let mut t = Tester {
        p,
        tol,
        log: Vec::new(),
    };
    Ok(Ok(skeleton_with(&mut t)?))
}

/// Edge-end labels: `Some(true)` means the edge points away from this end.
struct Ends {
    /// `away[v][w]` for the end at `v` of edge `v - w`.
    away: Vec<Vec<Option<bool>>>,
    required: Vec<Vec<Vec<bool>>>,
    neighbors: Vec<Vec<VarId>>,
}

impl Ends {
    fn is_required(&self, a: VarId, b: VarId, c: VarId) -> bool {
        self.required[b.index()][a.index()][c.index()]
    }

    fn get(&self, v: VarId, w: VarId) -> Option<bool> {
        self.away[v.index()][w.index()]
    }

    /// Sets an end label and propagates its consequences.
    fn set(&mut self, v: VarId, w: VarId, away: bool) -> Result<(), (VarId, VarId, VarId)> {
        let mut stack = vec![(v, w, away, None::<(VarId, VarId, VarId)>)];
        while let Some((v, w, away, cause)) = stack.pop() {
            match self.get(v, w) {
                Some(cur) if cur == away => continue,
                Some(_) => {
                    // The constraint that forced this end contradicts an
                    // earlier label.
                    return Err(cause.unwrap_or((w, v, w)));
                }
                None => self.away[v.index()][w.index()] = Some(away),
            }
            if away {
                // Never away at both ends.
                stack.push((w, v, false, cause.or(Some((v, w, v)))));
            } else {
                // Every non-required partner end at v must point away.
                for &u in &self.neighbors[v.index()] {
                    if u != w && !self.is_required(w, v, u) {
                        stack.push((v, u, true, Some(ordered(w, v, u))));
                    }
                }
            }
        }
        Ok(())
    }
}

fn ordered(a: VarId, b: VarId, c: VarId) -> (VarId, VarId, VarId) {
    if a <= c {
        (a, b, c)
    } else {
        (c, b, a)
    }
}

/// Orients a tree skeleton so that sinks appear exactly on the required
/// chains.
///
/// Ends forced by the constraints are fixed first; every vertex left with
/// unlabelled ends then becomes the root of an out-tree, in id order.
pub fn orient(c: &SinkConstraint) -> Result<Result<ETree, Failure>, RecoveryError> {
    let sk = &c.skeleton;
    let n = sk.universe.len();
    if !sk.is_tree() {
        return Err(GraphError::NotATree("skeleton is not a spanning tree".into()).into());
    }
    let mut ends = Ends {
        away: vec![vec![None; n]; n],
        required: vec![vec![vec![false; n]; n]; n],
        neighbors: sk
            .universe
            .ids()
            .map(|v| sk.neighbors(v).iter().collect())
            .collect(),
    };
    for &(a, b, cc) in &c.required_sinks {
        let nb = sk.neighbors(b);
        if a == cc || !nb.contains(a) || !nb.contains(cc) {
            return Err(RecoveryError::NotAChain(a.index(), b.index(), cc.index()));
        }
        ends.required[b.index()][a.index()][cc.index()] = true;
        ends.required[b.index()][cc.index()][a.index()] = true;
    }

    let conflict = |t: (VarId, VarId, VarId)| {
        Ok(Err(Failure {
            stage: Stage::OrientationConflict,
            witness: Witness::Triple(t.0, t.1, t.2),
        }))
    };

    // Ends inside required chains must not point away. Check pairwise
    // compatibility at each vertex first so the witness is the smallest
    // offending triple there.
    for b in sk.universe.ids() {
        let forced: Vec<VarId> = ends.neighbors[b.index()]
            .iter()
            .copied()
            .filter(|&a| {
                ends.neighbors[b.index()]
                    .iter()
                    .any(|&c| c != a && ends.is_required(a, b, c))
            })
            .collect();
        for (i, &a) in forced.iter().enumerate() {
            for &cc in &forced[i + 1..] {
                if !ends.is_required(a, b, cc) {
                    return conflict((a, b, cc));
                }
            }
        }
    }
    for &(a, b, cc) in &c.required_sinks {
        for end in [a, cc] {
            if let Err(t) = ends.set(b, end, false) {
                return conflict(t);
            }
        }
    }
    for r in sk.universe.ids() {
        let free: Vec<VarId> = ends.neighbors[r.index()]
            .iter()
            .copied()
            .filter(|&w| ends.get(r, w).is_none())
            .collect();
        for w in free {
            if ends.get(r, w).is_none() {
                if let Err(t) = ends.set(r, w, true) {
                    return conflict(t);
                }
            }
        }
    }

    let mut edges = Vec::new();
    for (a, b) in sk.edges() {
        let e = match (ends.get(a, b), ends.get(b, a)) {
            (Some(true), _) => Edge::Directed { tail: a, head: b },
            (_, Some(true)) => Edge::Directed { tail: b, head: a },
            _ => Edge::bidirected(a, b),
        };
        edges.push(e);
    }
    Ok(Ok(ETree::new(EDag::new(sk.universe.clone(), edges)?)?))
}

/// True iff every trek-connected pair of `t` is marginally dependent in `p`.
pub fn well_represented(t: &ETree, p: &JointTable, tol: f64) -> Result<bool, RecoveryError> {
    Ok(first_weak_trek(t, p, tol)?.is_none())
}

fn first_weak_trek(
    t: &ETree,
    p: &JointTable,
    tol: f64,
) -> Result<Option<(VarId, VarId, f64)>, RecoveryError> {
    let map = p.align(t.universe())?;
    for (a, b) in t.trek_pairs() {
        let s = Statement::new_unchecked(VarSet::singleton(a), VarSet::EMPTY, VarSet::singleton(b));
        let r = ci_residual(p, &s.remap(&map))?;
        if r <= tol {
            return Ok(Some((a, b, r)));
        }
    }
    Ok(None)
}

/// Runs the whole pipeline on `p`.
pub fn recover(p: &JointTable, tol: f64) -> Result<RecoveryOutcome, RecoveryError> {
    let mut tester = Tester {
        p,
        tol,
        log: Vec::new(),
    };
    let result = run(&mut tester)?;
    Ok(RecoveryOutcome {
        result,
        queries: tester.log,
    })
}

fn run(t: &mut Tester<'_>) -> Result<Result<ETree, Failure>, RecoveryError> {
    let p = t.p;
    let tol = t.tol;
    if let Some(row) = p.first_zero_row() {
        return Ok(Err(Failure {
            stage: Stage::NotPositive,
            witness: Witness::ZeroRow(row),
        }));
    }
    let skeleton = skeleton_with(t)?;
    if !skeleton.is_tree() {
        return Ok(Err(Failure {
            stage: Stage::NotTree,
            witness: Witness::Skeleton {
                edges: skeleton.edges(),
                components: skeleton.components(),
            },
        }));
    }

    let mut required_sinks = Vec::new();
    for b in skeleton.universe.ids() {
        let nb: Vec<VarId> = skeleton.neighbors(b).iter().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                if t.marginal(a, c)?.holds {
                    required_sinks.push((a, b, c));
                }
            }
        }
    }
    required_sinks.sort();
    let constraint = SinkConstraint {
        skeleton,
        required_sinks,
    };
    let tree = match orient(&constraint)? {
        Ok(tree) => tree,
        Err(f) => return Ok(Err(f)),
    };

    let report = verify_etree_imap(&tree, p, tol, false)?;
    for s in tree_basis_statements(&tree) {
        // Mirror the membership tests in the query log.
        let residual = ci_residual(p, &s)?;
        t.log.push(Query {
            statement: s,
            holds: residual <= tol,
            residual,
        });
        if residual > tol {
            break;
        }
    }
    if let Some(w) = report.witness() {
        return Ok(Err(Failure {
            stage: Stage::NotImap,
            witness: Witness::Statement(w.statement, w.residual),
        }));
    }
    for (a, b) in tree.trek_pairs() {
        let q = t.marginal(a, b)?;
        if q.holds {
            return Ok(Err(Failure {
                stage: Stage::NotWellRepresented,
                witness: Witness::Pair(a, b, q.residual),
            }));
        }
    }
    Ok(Ok(tree))
}

fn tree_basis_statements(t: &ETree) -> Vec<Statement> {
    crate::basis::build_bt(t).statements().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::etree_isomorphic;
    use crate::oracle::{sample_from_etree, SamplerConfig, DEFAULT_TOL};

    fn universe(names: &[&str]) -> Universe {
        Universe::new(names.iter().copied()).unwrap()
    }

    fn skeleton(names: &[&str], edges: &[(&str, &str)]) -> Skeleton {
        let u = universe(names);
        let mut adjacency = vec![VarSet::EMPTY; u.len()];
        for (a, b) in edges {
            let (a, b) = (u.lookup(a).unwrap(), u.lookup(b).unwrap());
            adjacency[a.index()].insert(b);
            adjacency[b.index()].insert(a);
        }
        Skeleton {
            universe: u,
            adjacency,
        }
    }

    fn id(u: &Universe, n: &str) -> VarId {
        u.lookup(n).unwrap()
    }

    fn tree(names: &[&str], d: &[(&str, &str)], b: &[(&str, &str)]) -> ETree {
        ETree::new(EDag::from_names(names, d, b).unwrap()).unwrap()
    }

    fn binary(names: &[&str]) -> Vec<(String, usize)> {
        names.iter().map(|n| (n.to_string(), 2)).collect()
    }

    /// a and c independent biased coins; b depends on both.
    fn generic_collider() -> JointTable {
        let pa = [0.3, 0.7];
        let pc = [0.6, 0.4];
        let pb1 = [[0.2, 0.55], [0.7, 0.9]];
        JointTable::from_fn(binary(&["a", "b", "c"]), |v| {
            let b1 = pb1[v[0]][v[2]];
            pa[v[0]] * pc[v[2]] * if v[1] == 1 { b1 } else { 1.0 - b1 }
        })
        .unwrap()
    }

    /// a -> b -> c with generic tables.
    fn generic_chain() -> JointTable {
        let pa = [0.35, 0.65];
        let pb1 = [0.2, 0.75];
        let pc1 = [0.3, 0.85];
        JointTable::from_fn(binary(&["a", "b", "c"]), |v| {
            let b = if v[1] == 1 { pb1[v[0]] } else { 1.0 - pb1[v[0]] };
            let c = if v[2] == 1 { pc1[v[1]] } else { 1.0 - pc1[v[1]] };
            pa[v[0]] * b * c
        })
        .unwrap()
    }

    fn parity() -> JointTable {
        JointTable::from_fn(binary(&["x1", "x2", "x3"]), |v| {
            let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            (1.0 + 0.4 * sign(v[0] + v[1] + v[2]) + 0.4 * sign(v[1] + v[2])) / 8.0
        })
        .unwrap()
    }

    fn xor() -> JointTable {
        JointTable::from_fn(binary(&["a", "b", "c"]), |v| {
            if v[1] == v[0] ^ v[2] {
                0.25
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn skeleton_examples() {
        let sk = build_skeleton(&generic_collider(), DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(sk, skeleton(&["a", "b", "c"], &[("a", "b"), ("b", "c")]));

        let sk = build_skeleton(&parity(), DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(sk, skeleton(&["x1", "x2", "x3"], &[("x2", "x3")]));
        assert!(!sk.is_tree());

        let product = JointTable::from_fn(binary(&["a", "b", "c"]), |_| 0.125).unwrap();
        let sk = build_skeleton(&product, DEFAULT_TOL).unwrap().unwrap();
        assert!(sk.edges().is_empty());

        let f = build_skeleton(&xor(), DEFAULT_TOL).unwrap().unwrap_err();
        assert_eq!(f.stage, Stage::NotPositive);
    }

    #[test]
    fn orient_examples() {
        let sk = skeleton(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let u = sk.universe.clone();
        let (a, b, c) = (id(&u, "a"), id(&u, "b"), id(&u, "c"));
        let t = orient(&SinkConstraint {
            skeleton: sk.clone(),
            required_sinks: vec![(a, b, c)],
        })
        .unwrap()
        .unwrap();
        assert_eq!(t, tree(&["a", "b", "c"], &[("a", "b"), ("c", "b")], &[]));

        let t = orient(&SinkConstraint {
            skeleton: sk,
            required_sinks: vec![],
        })
        .unwrap()
        .unwrap();
        assert_eq!(t, tree(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[]));
    }

    #[test]
    fn orient_star_conflict() {
        let sk = skeleton(
            &["a", "b", "c", "d", "e"],
            &[("b", "a"), ("b", "c"), ("b", "d"), ("b", "e")],
        );
        let u = sk.universe.clone();
        let v = |n| id(&u, n);
        let f = orient(&SinkConstraint {
            skeleton: sk,
            required_sinks: vec![(v("a"), v("b"), v("c")), (v("d"), v("b"), v("e"))],
        })
        .unwrap()
        .unwrap_err();
        assert_eq!(f.stage, Stage::OrientationConflict);
        assert_eq!(f.witness, Witness::Triple(v("a"), v("b"), v("d")));
    }

    #[test]
    fn orient_propagation_conflict() {
        // Required sinks at u and at v each force the middle edge u - v to
        // point away from that end.
        let sk = skeleton(
            &["p", "q", "u", "v", "r", "s"],
            &[("p", "u"), ("q", "u"), ("u", "v"), ("v", "r"), ("v", "s")],
        );
        let u = sk.universe.clone();
        let n = |s| id(&u, s);
        let f = orient(&SinkConstraint {
            skeleton: sk,
            required_sinks: vec![(n("p"), n("u"), n("q")), (n("r"), n("v"), n("s"))],
        })
        .unwrap()
        .unwrap_err();
        assert_eq!(f.stage, Stage::OrientationConflict);
        assert!(matches!(f.witness, Witness::Triple(..)));
    }

    #[test]
    fn orient_rejects_non_chain_triples() {
        let sk = skeleton(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let u = sk.universe.clone();
        let r = orient(&SinkConstraint {
            skeleton: sk,
            required_sinks: vec![(id(&u, "a"), id(&u, "c"), id(&u, "b"))],
        });
        assert!(matches!(r, Err(RecoveryError::NotAChain(..))));
    }

    #[test]
    fn well_represented_examples() {
        let coll = tree(&["a", "b", "c"], &[("a", "b"), ("c", "b")], &[]);
        assert!(!well_represented(&coll, &xor(), DEFAULT_TOL).unwrap());
        assert!(well_represented(&coll, &generic_collider(), DEFAULT_TOL).unwrap());

        let edge = tree(&["a", "b"], &[("a", "b")], &[]);
        let p = sample_from_etree(&edge, &SamplerConfig::with_seed(4)).unwrap();
        assert!(well_represented(&edge, &p, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn recover_collider() {
        let out = recover(&generic_collider(), DEFAULT_TOL).unwrap();
        let t = out.tree().expect("collider is recoverable");
        let expect = tree(&["a", "b", "c"], &[("a", "b"), ("c", "b")], &[]);
        assert!(etree_isomorphic(t, &expect).unwrap());
        assert!(!out.queries.is_empty());
    }

    #[test]
    fn recover_chain() {
        let out = recover(&generic_chain(), DEFAULT_TOL).unwrap();
        let t = out.tree().expect("chain is recoverable");
        let expect = tree(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[]);
        assert!(etree_isomorphic(t, &expect).unwrap());
    }

    #[test]
    fn recover_parity_fails_at_tree_check() {
        let out = recover(&parity(), DEFAULT_TOL).unwrap();
        let f = out.failure().unwrap();
        assert_eq!(f.stage, Stage::NotTree);
        match &f.witness {
            Witness::Skeleton { edges, components } => {
                assert_eq!(edges, &vec![(VarId::new(1), VarId::new(2))]);
                assert_eq!(*components, 2);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn recover_is_deterministic() {
        let a = recover(&generic_collider(), DEFAULT_TOL).unwrap();
        let b = recover(&generic_collider(), DEFAULT_TOL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_variable_recovers_trivially() {
        let p = JointTable::new(binary(&["a"]), vec![0.3, 0.7]).unwrap();
        let out = recover(&p, DEFAULT_TOL).unwrap();
        assert_eq!(out.tree().unwrap().len(), 1);
    }
}
