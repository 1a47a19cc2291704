//! Random and exhaustive generation of E-dags and E-trees.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{EDag, ETree, Edge};
use crate::varset::{Universe, VarId};

/// `a`, `b`, ... `z`, then `v26`, `v27`, ...
pub fn default_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                char::from(b'a' + i as u8).to_string()
            } else {
                format!("v{i}")
            }
        })
        .collect()
}

fn universe(n: usize) -> Universe {
    Universe::new(default_names(n)).expect("generated names are valid")
}

/// Each pair is joined with probability `p_edge`; a joined pair is
/// bidirected with probability `p_bidirected`, otherwise directed along a
/// random topological order.
pub fn random_edag<R: Rng + ?Sized>(rng: &mut R, n: usize, p_edge: f64, p_bidirected: f64) -> EDag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !rng.random_bool(p_edge) {
                continue;
            }
            let (a, b) = (VarId::new(order[i]), VarId::new(order[j]));
            edges.push(if rng.random_bool(p_bidirected) {
                Edge::bidirected(a, b)
            } else {
                Edge::Directed { tail: a, head: b }
            });
        }
    }
    EDag::new(universe(n), edges).expect("edges follow a topological order")
}

/// Labelled tree with the given Prufer code (length `n - 2`, entries below
/// `n`), as a list of undirected edges.
pub fn prufer_edges(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf, c));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// `kind` 0: `a -> b`, 1: `b -> a`, 2: `a <-> b`.
fn oriented(a: usize, b: usize, kind: usize) -> Edge {
    let (a, b) = (VarId::new(a), VarId::new(b));
    match kind {
        0 => Edge::Directed { tail: a, head: b },
        1 => Edge::Directed { tail: b, head: a },
        _ => Edge::bidirected(a, b),
    }
}

fn tree_from(n: usize, skeleton: &[(usize, usize)], kinds: &[usize]) -> ETree {
    let edges = skeleton
        .iter()
        .zip(kinds)
        .map(|(&(a, b), &k)| oriented(a, b, k));
    let g = EDag::new(universe(n), edges).expect("a tree has no cycles");
    ETree::new(g).expect("a Prufer code decodes to a spanning tree")
}

/// Uniform labelled skeleton, each edge oriented uniformly among the
/// three kinds.
pub fn random_etree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ETree {
    assert!(n >= 1, "an E-tree needs a vertex");
    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.random_range(0..n)).collect();
    let skeleton = prufer_edges(&code, n);
    let kinds: Vec<usize> = skeleton.iter().map(|_| rng.random_range(0..3)).collect();
    tree_from(n, &skeleton, &kinds)
}

/// Every labelled E-tree on `n` vertices: `n^(n-2) * 3^(n-1)` of them.
pub fn all_etrees(n: usize) -> Vec<ETree> {
    assert!(n >= 1, "an E-tree needs a vertex");
    let mut out = Vec::new();
    let mut code = vec![0usize; n.saturating_sub(2)];
    loop {
        let skeleton = prufer_edges(&code, n);
        let mut kinds = vec![0usize; skeleton.len()];
        loop {
            out.push(tree_from(n, &skeleton, &kinds));
            if !odometer(&mut kinds, 3) {
                break;
            }
        }
        if !odometer(&mut code, n) {
            break;
        }
    }
    out
}

/// Advances `digits` in base `base`; false after wrapping to all zeros.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn names() {
        assert_eq!(default_names(3), ["a", "b", "c"]);
        assert_eq!(default_names(28)[27], "v27");
    }

    #[test]
    fn prufer_decodes_known_trees() {
        assert_eq!(prufer_edges(&[], 2), [(0, 1)]);
        assert_eq!(prufer_edges(&[3, 3, 3], 5), [(0, 3), (1, 3), (2, 3), (3, 4)]);
        assert_eq!(prufer_edges(&[1, 2], 4), [(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn all_etrees_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| all_etrees(n).len()).collect();
        assert_eq!(counts, [1, 3, 27, 432, 10125]);
        let distinct: HashSet<String> = all_etrees(4)
            .iter()
            .map(|t| format!("{:?}", t.edges().collect::<Vec<_>>()))
            .collect();
        assert_eq!(distinct.len(), 432);
    }

    #[test]
    fn random_generators_are_valid_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=10 {
            let t = random_etree(&mut rng, n);
            assert_eq!(t.len(), n);
            assert_eq!(t.edge_count(), n - 1);
        }
        let g1 = random_edag(&mut ChaCha8Rng::seed_from_u64(9), 6, 0.5, 0.3);
        let g2 = random_edag(&mut ChaCha8Rng::seed_from_u64(9), 6, 0.5, 0.3);
        assert_eq!(g1, g2);
        let full = random_edag(&mut rng, 5, 1.0, 0.0);
        assert_eq!(full.edge_count(), 10);
        assert!(!full.has_bidirected());
    }
}
