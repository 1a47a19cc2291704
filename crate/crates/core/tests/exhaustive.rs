use std::collections::HashMap;

use ebn::gen::all_etrees;
use ebn::separation::enumerate_model;
use ebn::{etree_isomorphic, ETree, StatementSet};

fn models(trees: &[ETree]) -> Vec<StatementSet> {
    trees.iter().map(|t| enumerate_model(t, 5).unwrap()).collect()
}

/// Isomorphic E-trees are exactly those with equal dependency models.
#[test]
fn isomorphism_matches_model_equality_up_to_four_vertices() {
    for n in 1..=4 {
        let trees = all_etrees(n);
        let ms = models(&trees);
        for i in 0..trees.len() {
            for j in i..trees.len() {
                assert_eq!(
                    etree_isomorphic(&trees[i], &trees[j]).unwrap(),
                    ms[i] == ms[j],
                    "trees {i} and {j} on {n} vertices"
                );
            }
        }
    }
}

#[test]
fn isomorphism_matches_model_equality_on_five_vertices() {
    // Different skeletons never share a model (adjacent pairs are always
    // dependent), so comparing within each skeleton covers every pair.
    let trees = all_etrees(5);
    let ms = models(&trees);
    let mut by_skeleton: HashMap<_, Vec<usize>> = HashMap::new();
    for (i, t) in trees.iter().enumerate() {
        by_skeleton.entry(t.skeleton()).or_default().push(i);
    }
    assert_eq!(by_skeleton.len(), 125);
    for group in by_skeleton.values() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a..] {
                assert_eq!(etree_isomorphic(&trees[i], &trees[j]).unwrap(), ms[i] == ms[j]);
            }
        }
    }
    let mut seen = HashMap::<_, usize>::new();
    for (i, m) in ms.iter().enumerate() {
        if let Some(&j) = seen.get(m) {
            assert_eq!(trees[i].skeleton(), trees[j].skeleton());
        }
        seen.insert(m.clone(), i);
    }
}

#[test]
fn isomorphism_is_transitive_within_a_skeleton() {
    let trees: Vec<ETree> = all_etrees(4).into_iter().take(27).collect();
    for a in &trees {
        for b in &trees {
            for c in &trees {
                if etree_isomorphic(a, b).unwrap() && etree_isomorphic(b, c).unwrap() {
                    assert!(etree_isomorphic(a, c).unwrap());
                }
            }
        }
    }
}
