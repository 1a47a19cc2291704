//! Naive m-separation: enumerate every trail and test it directly.

use crate::graph::{EDag, Edge};
use crate::statement::Statement;
use crate::varset::{VarId, VarSet};

use super::{SeparationEngine, SeparationError};

/// Walks every simple trail of the mixed graph between X and Y and checks
/// the activation rule on each one. Exponential; intended for small graphs
/// and for cross-checking [`super::Reachability`].
#[derive(Debug, Default, Clone, Copy)]
pub struct TrailEnumeration;

impl SeparationEngine for TrailEnumeration {
    fn name(&self) -> &'static str {
        "trails"
    }

    fn separated(&self, g: &EDag, s: &Statement) -> Result<bool, SeparationError> {
        super::check_statement(g, s)?;
        let mut search = Search {
            g,
            z: s.z,
            y: s.y,
            desc: g.vertices().iter().map(|v| g.descendants_of_set(VarSet::singleton(v))).collect(),
            path: Vec::new(),
            edges: Vec::new(),
            on_path: VarSet::EMPTY,
        };
        for x in s.x {
            search.path.push(x);
            search.on_path.insert(x);
            let found = search.dfs();
            search.path.pop();
            search.on_path.remove(x);
            if found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct Search<'a> {
    g: &'a EDag,
    z: VarSet,
    y: VarSet,
    desc: Vec<VarSet>,
    path: Vec<VarId>,
    edges: Vec<Edge>,
    on_path: VarSet,
}

impl Search<'_> {
    /// Extends the current path; true once an active trail reaches Y.
    fn dfs(&mut self) -> bool {
        let v = *self.path.last().unwrap();
        if self.path.len() > 1 && self.y.contains(v) {
            return true;
        }
        for w in self.g.neighbors(v) - self.on_path {
            let e = self.g.edge_between(v, w).unwrap();
            if let Some(&prev) = self.edges.last() {
                if !self.interior_ok(v, prev, e) {
                    continue;
                }
            }
            self.path.push(w);
            self.edges.push(e);
            self.on_path.insert(w);
            let found = self.dfs();
            self.path.pop();
            self.edges.pop();
            self.on_path.remove(w);
            if found {
                return true;
            }
        }
        false
    }

    /// Whether `v`, entered by `e_in` and left by `e_out`, keeps the trail active.
    fn interior_ok(&self, v: VarId, e_in: Edge, e_out: Edge) -> bool {
        let sink = !e_in.points_away_from(v) && !e_out.points_away_from(v);
        if sink {
            !self.desc[v.index()].is_disjoint(self.z)
        } else {
            !self.z.contains(v)
        }
    }
}
