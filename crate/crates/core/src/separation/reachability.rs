//! Active-trail reachability over the latent expansion of an E-dag.

use crate::graph::EDag;
use crate::statement::Statement;
use crate::varset::{VarId, VarSet, MAX_VARS};

use super::{SeparationEngine, SeparationError};

/// Linear-time reachability ("Bayes ball") on the dag obtained by
/// replacing each bidirected edge with a latent parent of both endpoints.
#[derive(Debug, Default, Clone, Copy)]
pub struct Reachability;

impl SeparationEngine for Reachability {
    fn name(&self) -> &'static str {
        "reachability"
    }

    fn separated(&self, g: &EDag, s: &Statement) -> Result<bool, SeparationError> {
        super::check_statement(g, s)?;
        Ok(!LatentDag::new(g).reaches(s.x, s.z, s.y))
    }
}

/// Index-based copy of the latent transform.
///
/// The expansion can exceed the 64-vertex limit of [`VarSet`] (a clique of
/// bidirected edges adds one latent per edge), so it is kept as adjacency
/// lists. Observables keep their ids; latents follow in sorted
/// bidirected-edge order, the same layout as [`EDag::latent_transform`].
pub(crate) struct LatentDag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl LatentDag {
    pub(crate) fn new(g: &EDag) -> Self {
        let n = g.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (t, h) in g.directed_edges() {
            children[t.index()].push(h.index());
            parents[h.index()].push(t.index());
        }
        for (a, b) in g.bidirected_edges() {
            let l = parents.len();
            parents.push(Vec::new());
            children.push(vec![a.index(), b.index()]);
            parents[a.index()].push(l);
            parents[b.index()].push(l);
        }
        LatentDag { parents, children }
    }

    pub(crate) fn len(&self) -> usize {
        self.parents.len()
    }

    pub(crate) fn parents_of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// True if some vertex of `y` is reachable from `x` along a trail that
    /// is active given `z`.
    pub(crate) fn reaches(&self, x: VarSet, z: VarSet, y: VarSet) -> bool {
        let n = self.len();
        let in_z = |v: usize| v < MAX_VARS && z.contains(VarId::new(v));

        // Vertices with a descendant in Z (Z included).
        let mut has_desc_in_z = vec![false; n];
        let mut stack: Vec<usize> = z.iter().map(|v| v.index()).collect();
        for &v in &stack {
            has_desc_in_z[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !has_desc_in_z[p] {
                    has_desc_in_z[p] = true;
                    stack.push(p);
                }
            }
        }

        // State: (vertex, arrived from a child). Arriving "up" means the
        // previous edge points into the previous vertex, away from this one.
        let mut seen_up = vec![false; n];
        let mut seen_down = vec![false; n];
        let mut queue: Vec<(usize, bool)> = Vec::new();
        for v in x {
            seen_up[v.index()] = true;
            queue.push((v.index(), true));
        }
        while let Some((v, up)) = queue.pop() {
            if v < MAX_VARS && y.contains(VarId::new(v)) {
                return true;
            }
            let blocked = in_z(v);
            if up {
                // v is a non-sink whatever the next edge is.
                if blocked {
                    continue;
                }
                for &p in &self.parents[v] {
                    if !seen_up[p] {
                        seen_up[p] = true;
                        queue.push((p, true));
                    }
                }
                for &c in &self.children[v] {
                    if !seen_down[c] {
                        seen_down[c] = true;
                        queue.push((c, false));
                    }
                }
            } else {
                // Came along an edge into v. Continuing to a child keeps v a
                // non-sink; turning back to a parent makes v a sink.
                if !blocked {
                    for &c in &self.children[v] {
                        if !seen_down[c] {
                            seen_down[c] = true;
                            queue.push((c, false));
                        }
                    }
                }
                if has_desc_in_z[v] {
                    for &p in &self.parents[v] {
                        if !seen_up[p] {
                            seen_up[p] = true;
                            queue.push((p, true));
                        }
                    }
                }
            }
        }
        false
    }
}
