//! Mixed graphs with directed and bidirected edges.
//!
//! An [`EDag`] has no self-loops, at most one edge per vertex pair and no
//! directed cycles. A bidirected edge `a <-> b` stands for a hidden common
//! cause of `a` and `b`; [`EDag::latent_transform`] makes that explicit.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use crate::varset::{Universe, UniverseError, VarId, VarSet, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("more than one edge between `{0}` and `{1}`")]
    ParallelEdge(String, String),
    #[error("directed cycle {}", .0.join(" -> "))]
    DirectedCycle(Vec<String>),
    #[error("not a trail: {0}")]
    InvalidTrail(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("graphs are over different variables")]
    UniverseMismatch,
    #[error("graph would need {0} vertices, more than {MAX_VARS}")]
    TooManyVertices(usize),
}

/// A single edge of an E-dag.
///
/// Bidirected edges are stored with the smaller id first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Directed { tail: VarId, head: VarId },
    Bidirected(VarId, VarId),
}

impl Edge {
    pub fn bidirected(a: VarId, b: VarId) -> Edge {
        Edge::Bidirected(a.min(b), a.max(b))
    }

    pub fn endpoints(self) -> (VarId, VarId) {
        match self {
            Edge::Directed { tail, head } => (tail, head),
            Edge::Bidirected(a, b) => (a, b),
        }
    }

    /// True if this is a directed edge leaving `v`.
    pub fn points_away_from(self, v: VarId) -> bool {
        matches!(self, Edge::Directed { tail, .. } if tail == v)
    }

    pub fn other(self, v: VarId) -> VarId {
        let (a, b) = self.endpoints();
        if a == v {
            b
        } else {
            a
        }
    }
}

/// An E-dag over a named universe of vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct EDag {
    universe: Universe,
    edges: BTreeSet<Edge>,
    parents: Vec<VarSet>,
    children: Vec<VarSet>,
    spouses: Vec<VarSet>,
}

impl EDag {
    /// Validates a raw mixed graph given as edges by vertex name.
    pub fn from_names<S: AsRef<str>>(
        vertices: &[S],
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<EDag, GraphError> {
        let universe = Universe::new(vertices.iter().map(|s| s.as_ref().to_string()))?;
        let id = |name: &S| {
            universe
                .lookup(name.as_ref())
                .ok_or_else(|| GraphError::UnknownVertex(name.as_ref().to_string()))
        };
        let mut edges = Vec::with_capacity(directed.len() + bidirected.len());
        for (a, b) in directed {
            edges.push(Edge::Directed {
                tail: id(a)?,
                head: id(b)?,
            });
        }
        for (a, b) in bidirected {
            let (a, b) = (id(a)?, id(b)?);
            edges.push(if a == b {
                Edge::Bidirected(a, b)
            } else {
                Edge::bidirected(a, b)
            });
        }
        EDag::new(universe, edges)
    }

    /// Validates an E-dag: no self-loops, no parallel edges, no directed cycles.
    pub fn new(universe: Universe, edges: impl IntoIterator<Item = Edge>) -> Result<EDag, GraphError> {
        let n = universe.len();
        let mut parents = vec![VarSet::EMPTY; n];
        let mut children = vec![VarSet::EMPTY; n];
        let mut spouses = vec![VarSet::EMPTY; n];
        let mut set = BTreeSet::new();
        for e in edges {
            let (a, b) = e.endpoints();
            for v in [a, b] {
                if v.index() >= n {
                    return Err(GraphError::UnknownVertex(format!("#{}", v.index())));
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(universe.name(a).to_string()));
            }
            let adjacent = parents[a.index()] | children[a.index()] | spouses[a.index()];
            // A reversed directed edge is reported as the 2-cycle it forms.
            let reversed = matches!(e, Edge::Directed { .. }) && parents[a.index()].contains(b);
            if adjacent.contains(b) && !reversed {
                return Err(GraphError::ParallelEdge(
                    universe.name(a).to_string(),
                    universe.name(b).to_string(),
                ));
            }
            let e = match e {
                Edge::Bidirected(a, b) => Edge::bidirected(a, b),
                d => d,
            };
            match e {
                Edge::Directed { tail, head } => {
                    children[tail.index()].insert(head);
                    parents[head.index()].insert(tail);
                }
                Edge::Bidirected(a, b) => {
                    spouses[a.index()].insert(b);
                    spouses[b.index()].insert(a);
                }
            }
            set.insert(e);
        }
        let g = EDag {
            universe,
            edges: set,
            parents,
            children,
            spouses,
        };
        if let Some(cycle) = g.find_directed_cycle() {
            let names = cycle.iter().map(|&v| g.name(v).to_string()).collect();
            return Err(GraphError::DirectedCycle(names));
        }
        Ok(g)
    }

    fn find_directed_cycle(&self) -> Option<Vec<VarId>> {
        // Iterative DFS with white/grey/black colouring.
        let n = self.len();
        let mut colour = vec![0u8; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if colour[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, self.children[root].iter())];
            colour[root] = 1;
            while let Some((v, iter)) = stack.last_mut() {
                let v = *v;
                match iter.next() {
                    Some(w) => {
                        let w = w.index();
                        if colour[w] == 1 {
                            let mut cycle = vec![VarId::new(w)];
                            let mut cur = v;
                            while cur != w {
                                cycle.push(VarId::new(cur));
                                cur = parent[cur];
                            }
                            cycle.push(VarId::new(w));
                            cycle.reverse();
                            return Some(cycle);
                        }
                        if colour[w] == 0 {
                            colour[w] = 1;
                            parent[w] = v;
                            stack.push((w, self.children[w].iter()));
                        }
                    }
                    None => {
                        colour[v] = 2;
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn name(&self, v: VarId) -> &str {
        self.universe.name(v)
    }

    pub fn vertices(&self) -> VarSet {
        self.universe.all()
    }

    pub fn vertex(&self, name: &str) -> Result<VarId, GraphError> {
        self.universe
            .lookup(name)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    fn check_vertex(&self, v: VarId) -> Result<(), GraphError> {
        if v.index() < self.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(format!("#{}", v.index())))
        }
    }

    /// All edges, directed ones first, each group sorted.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().filter_map(|e| match *e {
            Edge::Directed { tail, head } => Some((tail, head)),
            _ => None,
        })
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().filter_map(|e| match *e {
            Edge::Bidirected(a, b) => Some((a, b)),
            _ => None,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_bidirected(&self) -> bool {
        self.spouses.iter().any(|s| !s.is_empty())
    }

    pub fn parents(&self, v: VarId) -> VarSet {
        self.parents[v.index()]
    }

    pub fn children(&self, v: VarId) -> VarSet {
        self.children[v.index()]
    }

    pub fn spouses(&self, v: VarId) -> VarSet {
        self.spouses[v.index()]
    }

    pub fn neighbors(&self, v: VarId) -> VarSet {
        self.parents(v) | self.children(v) | self.spouses(v)
    }

    /// The edge joining `a` and `b`, if any.
    pub fn edge_between(&self, a: VarId, b: VarId) -> Option<Edge> {
        if self.children(a).contains(b) {
            Some(Edge::Directed { tail: a, head: b })
        } else if self.children(b).contains(a) {
            Some(Edge::Directed { tail: b, head: a })
        } else if self.spouses(a).contains(b) {
            Some(Edge::bidirected(a, b))
        } else {
            None
        }
    }

    /// Vertices reachable from `x` along directed edges, `x` included.
    pub fn descendants(&self, x: VarId) -> Result<VarSet, GraphError> {
        self.check_vertex(x)?;
        Ok(self.descendants_of_set(VarSet::singleton(x)))
    }

    pub(crate) fn descendants_of_set(&self, start: VarSet) -> VarSet {
        let mut seen = start;
        let mut frontier = start;
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for v in frontier {
                next = next | self.children(v);
            }
            frontier = next - seen;
            seen = seen | next;
        }
        seen
    }

    /// `start` together with every vertex that has a directed path into it.
    pub fn ancestors_of_set(&self, start: VarSet) -> VarSet {
        let mut seen = start;
        let mut frontier = start;
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for v in frontier {
                next = next | self.parents(v);
            }
            frontier = next - seen;
            seen = seen | next;
        }
        seen
    }

    /// Undirected skeleton as sorted `(min, max)` pairs.
    pub fn skeleton(&self) -> Vec<(VarId, VarId)> {
        let mut out: Vec<_> = self
            .edges()
            .map(|e| {
                let (a, b) = e.endpoints();
                (a.min(b), a.max(b))
            })
            .collect();
        out.sort();
        out
    }

    /// Builds a trail from a vertex sequence, checking adjacency and that no
    /// vertex repeats.
    pub fn trail(&self, vertices: &[VarId]) -> Result<Trail, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::InvalidTrail("empty vertex sequence".into()));
        }
        let mut seen = VarSet::EMPTY;
        for &v in vertices {
            self.check_vertex(v)?;
            if !seen.insert(v) {
                return Err(GraphError::InvalidTrail(format!(
                    "vertex `{}` repeats",
                    self.name(v)
                )));
            }
        }
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            let e = self.edge_between(w[0], w[1]).ok_or_else(|| {
                GraphError::InvalidTrail(format!(
                    "`{}` and `{}` are not adjacent",
                    self.name(w[0]),
                    self.name(w[1])
                ))
            })?;
            edges.push(e);
        }
        Ok(Trail {
            vertices: vertices.to_vec(),
            edges,
        })
    }

    /// Trail by vertex names, mainly for tests and the CLI.
    pub fn trail_by_names(&self, names: &[&str]) -> Result<Trail, GraphError> {
        let ids = names
            .iter()
            .map(|n| self.vertex(n))
            .collect::<Result<Vec<_>, _>>()?;
        self.trail(&ids)
    }

    fn check_trail(&self, t: &Trail) -> Result<(), GraphError> {
        let rebuilt = self.trail(&t.vertices)?;
        if rebuilt.edges != t.edges {
            return Err(GraphError::InvalidTrail(
                "edge kinds do not match the graph".into(),
            ));
        }
        Ok(())
    }

    /// Interior vertices of `t` at which neither trail edge points away.
    pub fn sinks_on_trail(&self, t: &Trail) -> Result<VarSet, GraphError> {
        self.check_trail(t)?;
        Ok(t.sinks())
    }

    /// A trek is a trail with no sinks.
    pub fn is_trek(&self, t: &Trail) -> Result<bool, GraphError> {
        Ok(self.sinks_on_trail(t)?.is_empty())
    }

    /// Replaces every bidirected edge `x <-> y` by a fresh latent vertex with
    /// edges into `x` and `y`.
    ///
    /// Latents are appended after the original vertices as `_L0`, `_L1`, ..
    /// in sorted bidirected-edge order.
    pub fn latent_transform(&self) -> Result<EDag, GraphError> {
        let bidirected: Vec<_> = self.bidirected_edges().collect();
        let total = self.len() + bidirected.len();
        if total > MAX_VARS {
            return Err(GraphError::TooManyVertices(total));
        }
        let mut names = self.universe.names().to_vec();
        let mut edges: Vec<Edge> = self
            .directed_edges()
            .map(|(tail, head)| Edge::Directed { tail, head })
            .collect();
        for (i, (a, b)) in bidirected.into_iter().enumerate() {
            let latent = VarId::new(names.len());
            names.push(latent_name(self, i));
            edges.push(Edge::Directed { tail: latent, head: a });
            edges.push(Edge::Directed { tail: latent, head: b });
        }
        EDag::new(Universe::new(names)?, edges)
    }

    /// Connected components of the skeleton.
    pub fn components(&self) -> Vec<VarSet> {
        let mut left = self.vertices();
        let mut out = Vec::new();
        while let Some(root) = left.first() {
            let mut comp = VarSet::singleton(root);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VarSet::EMPTY;
                for v in frontier {
                    next = next | self.neighbors(v);
                }
                frontier = next - comp;
                comp = comp | next;
            }
            left = left - comp;
            out.push(comp);
        }
        out
    }
}

fn latent_name(g: &EDag, i: usize) -> String {
    // Avoid clashing with an observable that already uses the name.
    let mut name = format!("_L{i}");
    while g.universe.lookup(&name).is_some() {
        name.insert(0, '_');
    }
    name
}

impl fmt::Debug for EDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EDag[")?;
        for (i, e) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match e {
                Edge::Directed { tail, head } => {
                    write!(f, "{}->{}", self.name(tail), self.name(head))?
                }
                Edge::Bidirected(a, b) => write!(f, "{}<->{}", self.name(a), self.name(b))?,
            }
        }
        write!(f, "] over {:?}", self.universe)
    }
}

/// A simple path in the skeleton together with the edges it uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trail {
    vertices: Vec<VarId>,
    edges: Vec<Edge>,
}

impl Trail {
    pub fn vertices(&self) -> &[VarId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn interior(&self) -> &[VarId] {
        match self.vertices.len() {
            0..=2 => &[],
            n => &self.vertices[1..n - 1],
        }
    }

    /// Endpoints are never sinks.
    pub fn sinks(&self) -> VarSet {
        let mut out = VarSet::EMPTY;
        for (i, pair) in self.edges.windows(2).enumerate() {
            let b = self.vertices[i + 1];
            if !pair[0].points_away_from(b) && !pair[1].points_away_from(b) {
                out.insert(b);
            }
        }
        out
    }
}

/// An E-dag whose skeleton is a tree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ETree(EDag);

impl ETree {
    pub fn new(g: EDag) -> Result<ETree, GraphError> {
        let n = g.len();
        if n == 0 {
            return Err(GraphError::NotATree("no vertices".into()));
        }
        if g.edge_count() != n - 1 {
            return Err(GraphError::NotATree(format!(
                "{} edges on {} vertices",
                g.edge_count(),
                n
            )));
        }
        let comps = g.components();
        if comps.len() != 1 {
            return Err(GraphError::NotATree(format!(
                "{} connected components",
                comps.len()
            )));
        }
        Ok(ETree(g))
    }

    pub fn as_edag(&self) -> &EDag {
        &self.0
    }

    pub fn into_edag(self) -> EDag {
        self.0
    }

    /// The single skeleton path from `a` to `b`.
    pub fn unique_trail(&self, a: VarId, b: VarId) -> Result<Trail, GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        // Breadth-first search from `a`, then walk back from `b`.
        let n = self.len();
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::from([a]);
        prev[a.index()] = a.index();
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for w in self.neighbors(v) {
                if prev[w.index()] == usize::MAX {
                    prev[w.index()] = v.index();
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![b];
        let mut cur = b.index();
        while cur != a.index() {
            cur = prev[cur];
            path.push(VarId::new(cur));
        }
        path.reverse();
        self.trail(&path)
    }

    /// Vertices whose path to `x` leaves `x` through `neighbor`.
    pub fn branch(&self, x: VarId, neighbor: VarId) -> VarSet {
        let mut comp = VarSet::singleton(neighbor);
        let mut frontier = comp;
        let blocked = VarSet::singleton(x);
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for v in frontier {
                next = next | self.neighbors(v);
            }
            frontier = next - comp - blocked;
            comp = comp | frontier;
        }
        comp
    }

    /// Length-2 chains `(a, b, c)` of the skeleton with `a < c`.
    pub fn chains(&self) -> Vec<(VarId, VarId, VarId)> {
        let mut out = Vec::new();
        for b in self.vertices() {
            let nb: Vec<_> = self.neighbors(b).iter().collect();
            for (i, &a) in nb.iter().enumerate() {
                for &c in &nb[i + 1..] {
                    out.push((a, b, c));
                }
            }
        }
        out.sort();
        out
    }

    /// True when `b` is a sink on the chain `a - b - c`.
    pub fn is_sink_at(&self, a: VarId, b: VarId, c: VarId) -> bool {
        match (self.edge_between(a, b), self.edge_between(b, c)) {
            (Some(e1), Some(e2)) => !e1.points_away_from(b) && !e2.points_away_from(b),
            _ => false,
        }
    }

    /// Unordered pairs joined by a trail without sinks.
    pub fn trek_pairs(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for a in self.vertices() {
            for b in self.vertices() {
                if a < b {
                    let t = self
                        .unique_trail(a, b)
                        .expect("a tree connects every pair");
                    if t.sinks().is_empty() {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }
}

impl Deref for ETree {
    type Target = EDag;
    fn deref(&self) -> &EDag {
        &self.0
    }
}

impl TryFrom<EDag> for ETree {
    type Error = GraphError;
    fn try_from(g: EDag) -> Result<ETree, GraphError> {
        ETree::new(g)
    }
}

/// Same skeleton, and the same sink status on every length-2 chain.
///
/// Vertices are matched by name, so the two trees may declare them in
/// different orders.
pub fn etree_isomorphic(t1: &ETree, t2: &ETree) -> Result<bool, GraphError> {
    let mut names1: Vec<&String> = t1.universe().names().iter().collect();
    let mut names2: Vec<&String> = t2.universe().names().iter().collect();
    names1.sort();
    names2.sort();
    if names1 != names2 {
        return Err(GraphError::UniverseMismatch);
    }
    Ok(named_signature(t1) == named_signature(t2))
}

type Signature<'a> = (BTreeSet<(&'a str, &'a str)>, BTreeSet<(&'a str, &'a str, &'a str)>);

fn ordered_pair<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn named_signature(t: &ETree) -> Signature<'_> {
    let pair = ordered_pair;
    let skeleton = t
        .skeleton()
        .into_iter()
        .map(|(a, b)| pair(t.name(a), t.name(b)))
        .collect();
    let sinks = t
        .chains()
        .into_iter()
        .filter(|&(a, b, c)| t.is_sink_at(a, b, c))
        .map(|(a, b, c)| {
            let (a, c) = pair(t.name(a), t.name(c));
            (a, t.name(b), c)
        })
        .collect();
    (skeleton, sinks)
}
