//! m-separation on E-dags, dependency-model enumeration and recursive bases.

mod reachability;
mod trails;

pub use reachability::Reachability;
pub use trails::TrailEnumeration;

pub(crate) use reachability::LatentDag;

use crate::graph::EDag;
use crate::statement::{all_statements, Statement, StatementError, StatementSet};
use crate::varset::VarSet;

/// Default size guard for exhaustive enumeration of `M(G)`.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeparationError {
    #[error("invalid statement: {0}")]
    InvalidStatement(StatementError),
    #[error("statement mentions vertex #{0}, but the graph has {1} vertices")]
    UnknownVertex(usize, usize),
    #[error("{size} vertices exceed the enumeration limit of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },
    #[error("graph has bidirected edges; a recursive basis needs a dag")]
    HasBidirectedEdge,
}

/// A procedure deciding membership of a statement in `M(G)`.
pub trait SeparationEngine: Send + Sync {
    fn name(&self) -> &'static str;

    /// True iff every trail between X and Y is blocked by Z.
    fn separated(&self, g: &EDag, s: &Statement) -> Result<bool, SeparationError>;
}

pub(crate) fn check_statement(g: &EDag, s: &Statement) -> Result<(), SeparationError> {
    match s.check_within(g.len()) {
        Ok(()) => Ok(()),
        Err(StatementError::UnknownVariable(v, n)) => Err(SeparationError::UnknownVertex(v, n)),
        Err(e) => Err(SeparationError::InvalidStatement(e)),
    }
}

/// Membership of `s` in `M(g)` using [`Reachability`].
pub fn m_separated(g: &EDag, s: &Statement) -> Result<bool, SeparationError> {
    Reachability.separated(g, s)
}

fn guard(g: &EDag, limit: usize) -> Result<(), SeparationError> {
    if g.len() > limit {
        return Err(SeparationError::UniverseTooLarge {
            size: g.len(),
            limit,
        });
    }
    Ok(())
}

/// Every statement of `M(g)`.
pub fn enumerate_model(g: &EDag, limit: usize) -> Result<StatementSet, SeparationError> {
    enumerate_model_with(&Reachability, g, limit)
}

pub fn enumerate_model_with(
    engine: &dyn SeparationEngine,
    g: &EDag,
    limit: usize,
) -> Result<StatementSet, SeparationError> {
    guard(g, limit)?;
    let mut out = StatementSet::new();
    for s in all_statements(g.len()) {
        if engine.separated(g, &s)? {
            out.insert(s);
        }
    }
    Ok(out)
}

/// Members of `M(g)` whose X and Y are singletons.
pub fn simple_statements(g: &EDag, limit: usize) -> Result<StatementSet, SeparationError> {
    guard(g, limit)?;
    let all = g.vertices();
    let mut out = StatementSet::new();
    for a in all {
        for b in all - VarSet::singleton(a) {
            let rest = all - VarSet::singleton(a) - VarSet::singleton(b);
            for z in rest.subsets() {
                let s = Statement::new_unchecked(VarSet::singleton(a), z, VarSet::singleton(b));
                if m_separated(g, &s)? {
                    out.insert(s);
                }
            }
        }
    }
    Ok(out)
}

/// `I(v, Pa(v), Nd(v) \ Pa(v))` for every vertex of a dag, skipping the
/// vacuous ones.
pub fn recursive_basis(d: &EDag) -> Result<StatementSet, SeparationError> {
    if d.has_bidirected() {
        return Err(SeparationError::HasBidirectedEdge);
    }
    let all = d.vertices();
    let mut out = StatementSet::new();
    for v in all {
        let pa = d.parents(v);
        let nd = all - d.descendants_of_set(VarSet::singleton(v));
        let rest = nd - pa;
        if !rest.is_empty() {
            out.insert(Statement::new_unchecked(VarSet::singleton(v), pa, rest));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varset::VarId;

    fn fig1() -> EDag {
        EDag::from_names(
            &["B", "E", "A", "R"],
            &[("B", "A"), ("E", "A"), ("E", "R")],
            &[],
        )
        .unwrap()
    }

    fn st(g: &EDag, x: &[&str], z: &[&str], y: &[&str]) -> Statement {
        let f = |names: &[&str]| names.iter().map(|n| g.vertex(n).unwrap()).collect::<VarSet>();
        Statement::new(f(x), f(z), f(y)).unwrap()
    }

    fn both(g: &EDag, s: &Statement) -> bool {
        let fast = Reachability.separated(g, s).unwrap();
        let slow = TrailEnumeration.separated(g, s).unwrap();
        assert_eq!(fast, slow, "engines disagree on {s:?}");
        fast
    }

    #[test]
    fn figure1_statements() {
        let g = fig1();
        assert!(both(&g, &st(&g, &["B"], &[], &["E"])));
        assert!(both(&g, &st(&g, &["R"], &["E"], &["A", "B"])));
        assert!(both(&g, &st(&g, &["B"], &[], &["R"])));
        assert!(both(&g, &st(&g, &["B"], &[], &["E", "R"])));
        assert!(!both(&g, &st(&g, &["B"], &["A"], &["E"])));
    }

    #[test]
    fn bidirected_chain() {
        let g = EDag::from_names(&["a", "b", "c"], &[], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(both(&g, &st(&g, &["a"], &[], &["c"])));
        assert!(!both(&g, &st(&g, &["a"], &["b"], &["c"])));
    }

    #[test]
    fn descendant_of_sink_activates() {
        let g = EDag::from_names(&["a", "b", "c", "d"], &[("b", "d")], &[("a", "b"), ("b", "c")])
            .unwrap();
        assert!(both(&g, &st(&g, &["a"], &[], &["c"])));
        assert!(!both(&g, &st(&g, &["a"], &["d"], &["c"])));
    }

    #[test]
    fn invalid_statements_are_errors() {
        let g = fig1();
        let bad = Statement::new_unchecked(VarSet::singleton(VarId::new(0)), VarSet::EMPTY, VarSet::singleton(VarId::new(9)));
        assert_eq!(m_separated(&g, &bad), Err(SeparationError::UnknownVertex(9, 4)));
        let overlap = Statement::new_unchecked(
            VarSet::singleton(VarId::new(0)),
            VarSet::singleton(VarId::new(0)),
            VarSet::singleton(VarId::new(1)),
        );
        assert_eq!(
            m_separated(&g, &overlap),
            Err(SeparationError::InvalidStatement(StatementError::NotDisjoint))
        );
    }

    #[test]
    fn enumerate_examples() {
        let iso = EDag::from_names::<&str>(&["a", "b"], &[], &[]).unwrap();
        let m = enumerate_model(&iso, 7).unwrap();
        assert_eq!(
            m,
            [st(&iso, &["a"], &[], &["b"]), st(&iso, &["b"], &[], &["a"])]
                .into_iter()
                .collect()
        );
        let edge = EDag::from_names(&["a", "b"], &[("a", "b")], &[]).unwrap();
        assert!(enumerate_model(&edge, 7).unwrap().is_empty());

        let g = fig1();
        let m = enumerate_model(&g, 7).unwrap();
        assert!(m.contains(&st(&g, &["B"], &[], &["E"])));
        assert!(m.contains(&st(&g, &["R"], &["E"], &["A", "B"])));

        let big = EDag::from_names::<&str>(&["a", "b", "c"], &[], &[]).unwrap();
        assert_eq!(
            enumerate_model(&big, 2),
            Err(SeparationError::UniverseTooLarge { size: 3, limit: 2 })
        );
    }

    #[test]
    fn simple_statement_examples() {
        let chain = EDag::from_names(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[]).unwrap();
        let s = simple_statements(&chain, 7).unwrap();
        assert!(s.contains(&st(&chain, &["a"], &["b"], &["c"])));
        assert!(s.contains(&st(&chain, &["c"], &["b"], &["a"])));

        let coll = EDag::from_names(&["a", "b", "c"], &[("a", "b"), ("c", "b")], &[]).unwrap();
        let s = simple_statements(&coll, 7).unwrap();
        assert!(s.contains(&st(&coll, &["a"], &[], &["c"])));
        assert!(!s.contains(&st(&coll, &["a"], &["b"], &["c"])));

        let bi = EDag::from_names(&["a", "b"], &[], &[("a", "b")]).unwrap();
        assert!(simple_statements(&bi, 7).unwrap().is_empty());
    }

    #[test]
    fn recursive_basis_examples() {
        let g = fig1();
        let b = recursive_basis(&g).unwrap();
        assert!(b.contains(&st(&g, &["R"], &["E"], &["A", "B"])));
        assert!(b.contains(&st(&g, &["B"], &[], &["E", "R"])));
        assert!(b.len() <= g.len());
        for s in &b {
            assert!(m_separated(&g, s).unwrap());
        }

        let lone = EDag::from_names::<&str>(&["v"], &[], &[]).unwrap();
        assert!(recursive_basis(&lone).unwrap().is_empty());

        let bi = EDag::from_names(&["a", "b"], &[], &[("a", "b")]).unwrap();
        assert_eq!(recursive_basis(&bi), Err(SeparationError::HasBidirectedEdge));
    }

    #[test]
    fn clique_expansion_beyond_64_vertices() {
        // Ten fully connected bidirected vertices expand to 55 vertices;
        // twelve expand to 78.
        let names: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
        let mut bi = Vec::new();
        for i in 0..12 {
            for j in i + 1..12 {
                bi.push((names[i].clone(), names[j].clone()));
            }
        }
        let g = EDag::from_names(&names, &[], &bi).unwrap();
        assert!(g.latent_transform().is_err());
        let s = Statement::simple(VarId::new(0), VarSet::EMPTY, VarId::new(1)).unwrap();
        assert!(!m_separated(&g, &s).unwrap());
    }
}
