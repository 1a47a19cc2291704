//! The two-clique family `G_k`, whose probabilistic bases all have at least
//! `2^k` members, and checks of the mechanisms behind that bound.

use std::fmt;

use crate::graph::{EDag, Edge, GraphError};
use crate::graphoid::{closure, AxiomSet, ClosureError, DEFAULT_BUDGET};
use crate::separation::{enumerate_model, m_separated, SeparationError};
use crate::statement::{Statement, StatementSet};
use crate::varset::{Universe, VarId, VarSet};

/// Largest `k` for which `G_k` fits in a [`VarSet`].
pub const MAX_K: usize = 31;
/// Largest `k` for which the partition check enumerates the whole model.
pub const PARTITION_CHECK_LIMIT: usize = 2;
/// Largest `k` for which the irredundancy check computes closures.
pub const IRREDUNDANCY_CHECK_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HardnessError {
    #[error("k must lie in 1..={MAX_K}, got {0}")]
    InvalidK(usize),
    #[error("statement is not in the model of the graph")]
    StatementNotInModel,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkInstance {
    pub k: usize,
    pub graph: EDag,
}

impl GkInstance {
    pub fn c(&self, i: usize) -> VarId {
        VarId::new(i)
    }

    pub fn d(&self, i: usize) -> VarId {
        VarId::new(self.k + 1 + i)
    }
}

fn check_k(k: usize) -> Result<(), HardnessError> {
    if k == 0 || k > MAX_K {
        return Err(HardnessError::InvalidK(k));
    }
    Ok(())
}

/// Vertices `c0..ck, d0..dk`; `C` and `D` are bidirected cliques and
/// `c_i <-> d_i` for `i >= 1`.
pub fn build_gk(k: usize) -> Result<GkInstance, HardnessError> {
    check_k(k)?;
    let names = (0..=k)
        .map(|i| format!("c{i}"))
        .chain((0..=k).map(|i| format!("d{i}")));
    let universe = Universe::new(names).map_err(GraphError::from)?;
    let c = |i: usize| VarId::new(i);
    let d = |i: usize| VarId::new(k + 1 + i);
    let mut edges = Vec::new();
    for i in 0..=k {
        for j in i + 1..=k {
            edges.push(Edge::bidirected(c(i), c(j)));
            edges.push(Edge::bidirected(d(i), d(j)));
        }
    }
    for i in 1..=k {
        edges.push(Edge::bidirected(c(i), d(i)));
    }
    Ok(GkInstance {
        k,
        graph: EDag::new(universe, edges)?,
    })
}

/// The `2^k` marginal statements `I({c0} + C', 0, {d0} + D')` where each
/// rung contributes exactly one endpoint.
pub fn t_set(k: usize) -> Result<StatementSet, HardnessError> {
    check_k(k)?;
    let c = |i: usize| VarId::new(i);
    let d = |i: usize| VarId::new(k + 1 + i);
    let mut out = StatementSet::new();
    for mask in 0u64..(1u64 << k) {
        let mut x = VarSet::singleton(c(0));
        let mut y = VarSet::singleton(d(0));
        for i in 1..=k {
            if mask >> (i - 1) & 1 == 1 {
                x.insert(c(i));
            } else {
                y.insert(d(i));
            }
        }
        out.insert(Statement::new_unchecked(x, VarSet::EMPTY, y));
    }
    Ok(out)
}

/// First split `Z = Z' + Z''` (submasks of `Z` in increasing order) with
/// `I(X + Z', 0, Y + Z'')` in `M(g)`.
pub fn theorem2_partition(
    g: &EDag,
    s: &Statement,
) -> Result<Option<(VarSet, VarSet)>, HardnessError> {
    if !m_separated(g, s)? {
        return Err(HardnessError::StatementNotInModel);
    }
    let z = s.z;
    let mut mask = 0u64;
    loop {
        let zp = VarSet::from_bits(mask);
        let zpp = z - zp;
        let m = Statement::new_unchecked(s.x | zp, VarSet::EMPTY, s.y | zpp);
        if m_separated(g, &m)? {
            return Ok(Some((zp, zpp)));
        }
        mask = (mask | !z.bits()).wrapping_add(1) & z.bits();
        if mask == 0 {
            return Ok(None);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardnessReport {
    pub k: usize,
    pub t_size: usize,
    pub checks: Vec<Check>,
}

impl HardnessReport {
    pub fn passed(&self) -> bool {
        !self
            .checks
            .iter()
            .any(|c| matches!(c.status, CheckStatus::Failed(_)))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Passed => f.write_str("PASS"),
            CheckStatus::Failed(why) => write!(f, "FAIL ({why})"),
            CheckStatus::Skipped(why) => write!(f, "SKIP ({why})"),
        }
    }
}

/// Runs the four checks on `G_k`:
///
/// * `a`: `|T| = 2^k`;
/// * `b`: every member of `T` is m-separated in `G_k`;
/// * `c`: every statement of `M(G_k)` has a marginal partition (small `k`);
/// * `d`: no member of `T` follows from the rest of `T` and its symmetric
///   images under the marginal axioms (small `k`).
pub fn verify_hardness(k: usize) -> Result<HardnessReport, HardnessError> {
    let gk = build_gk(k)?;
    let g = &gk.graph;
    let t = t_set(k)?;
    let mut checks = Vec::new();

    let expected = 1usize << k;
    checks.push(Check {
        name: "a",
        description: "|T| = 2^k",
        status: if t.len() == expected {
            CheckStatus::Passed
        } else {
            CheckStatus::Failed(format!("|T| = {}, expected {expected}", t.len()))
        },
    });

    let mut status = CheckStatus::Passed;
    for s in &t {
        if !m_separated(g, s)? {
            status = CheckStatus::Failed(format!("{} is not m-separated", s.display(g.universe())));
            break;
        }
    }
    checks.push(Check {
        name: "b",
        description: "T is contained in M(G_k)",
        status,
    });

    let status = if k > PARTITION_CHECK_LIMIT {
        CheckStatus::Skipped(format!("k > {PARTITION_CHECK_LIMIT}"))
    } else {
        let mut status = CheckStatus::Passed;
        for s in &enumerate_model(g, 2 * PARTITION_CHECK_LIMIT + 2)? {
            if theorem2_partition(g, s)?.is_none() {
                status = CheckStatus::Failed(format!("no partition for {}", s.display(g.universe())));
                break;
            }
        }
        status
    };
    checks.push(Check {
        name: "c",
        description: "every statement of M(G_k) has a marginal partition",
        status,
    });

    let status = if k > IRREDUNDANCY_CHECK_LIMIT {
        CheckStatus::Skipped(format!("k > {IRREDUNDANCY_CHECK_LIMIT}"))
    } else {
        let both = t.with_symmetric_images();
        let mut status = CheckStatus::Passed;
        for s in &t {
            let mut rest = both.clone();
            rest.remove(s);
            rest.remove(&s.symmetric());
            let cl = closure(&rest, &AxiomSet::marginal(), DEFAULT_BUDGET)?;
            if cl.statements().contains(s) {
                status = CheckStatus::Failed(format!(
                    "{} follows from the rest of T",
                    s.display(g.universe())
                ));
                break;
            }
        }
        status
    };
    checks.push(Check {
        name: "d",
        description: "each member of T is independent of the others",
        status,
    });

    Ok(HardnessReport {
        k,
        t_size: t.len(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(g: &EDag, x: &[&str], z: &[&str], y: &[&str]) -> Statement {
        let set = |ns: &[&str]| ns.iter().map(|n| g.vertex(n).unwrap()).collect::<VarSet>();
        Statement::new(set(x), set(z), set(y)).unwrap()
    }

    #[test]
    fn gk_shape() {
        let g1 = build_gk(1).unwrap();
        assert_eq!(g1.graph.len(), 4);
        let expect = EDag::from_names(
            &["c0", "c1", "d0", "d1"],
            &[],
            &[("c0", "c1"), ("d0", "d1"), ("c1", "d1")],
        )
        .unwrap();
        assert_eq!(g1.graph, expect);

        for k in 1..=6 {
            let g = build_gk(k).unwrap();
            assert_eq!(g.graph.len(), 2 * k + 2);
            assert_eq!(g.graph.edge_count(), k * (k + 1) + k);
            assert_eq!(g.graph.name(g.c(0)), "c0");
            assert_eq!(g.graph.name(g.d(k)), format!("d{k}"));
        }
        assert_eq!(build_gk(0), Err(HardnessError::InvalidK(0)));
        assert_eq!(t_set(0), Err(HardnessError::InvalidK(0)));
    }

    #[test]
    fn t_set_examples() {
        let g = build_gk(1).unwrap().graph;
        let t = t_set(1).unwrap();
        let expect: StatementSet = [
            named(&g, &["c0", "c1"], &[], &["d0"]),
            named(&g, &["c0"], &[], &["d0", "d1"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(t, expect);

        let g = build_gk(2).unwrap().graph;
        let t = t_set(2).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.contains(&named(&g, &["c0", "c1", "c2"], &[], &["d0"])));
        assert!(t.contains(&named(&g, &["c0"], &[], &["d0", "d1", "d2"])));

        for k in 1..=10 {
            assert_eq!(t_set(k).unwrap().len(), 1 << k);
        }
    }

    #[test]
    fn t_set_is_in_the_model() {
        for k in 1..=5 {
            let g = build_gk(k).unwrap().graph;
            for s in &t_set(k).unwrap() {
                assert!(m_separated(&g, s).unwrap());
            }
        }
    }

    #[test]
    fn partition_examples() {
        let g = build_gk(1).unwrap().graph;
        let s = named(&g, &["c0"], &[], &["d0"]);
        assert_eq!(
            theorem2_partition(&g, &s).unwrap(),
            Some((VarSet::EMPTY, VarSet::EMPTY))
        );

        let s = named(&g, &["c1"], &["c0"], &["d0"]);
        let c0 = VarSet::singleton(g.vertex("c0").unwrap());
        assert_eq!(theorem2_partition(&g, &s).unwrap(), Some((c0, VarSet::EMPTY)));

        // d1 is a sink outside Z, so c0 <-> c1 <-> d1 <-> d0 stays blocked.
        let s = named(&g, &["c0"], &["c1"], &["d0"]);
        let c1 = VarSet::singleton(g.vertex("c1").unwrap());
        assert_eq!(theorem2_partition(&g, &s).unwrap(), Some((c1, VarSet::EMPTY)));

        // Conditioning on both sinks opens it.
        let s = named(&g, &["c0"], &["c1", "d1"], &["d0"]);
        assert_eq!(
            theorem2_partition(&g, &s),
            Err(HardnessError::StatementNotInModel)
        );
        let s = named(&g, &["c1"], &[], &["d1"]);
        assert_eq!(
            theorem2_partition(&g, &s),
            Err(HardnessError::StatementNotInModel)
        );
    }

    #[test]
    fn verify_small_k() {
        let r = verify_hardness(1).unwrap();
        assert!(r.passed());
        assert!(r.checks.iter().all(|c| c.status == CheckStatus::Passed));

        let r = verify_hardness(3).unwrap();
        assert!(r.passed());
        assert_eq!(r.t_size, 8);
        assert!(matches!(r.check("c").unwrap().status, CheckStatus::Skipped(_)));
        assert_eq!(r.check("d").unwrap().status, CheckStatus::Passed);
    }

    #[test]
    fn verify_k8_counts() {
        let r = verify_hardness(8).unwrap();
        assert_eq!(r.t_size, 256);
        assert_eq!(r.check("a").unwrap().status, CheckStatus::Passed);
        assert_eq!(r.check("b").unwrap().status, CheckStatus::Passed);
        assert!(r.passed());
    }
}
