//! Inference rules over independence statements.
//!
//! Unary rules rewrite one statement. Binary rules look up their partner
//! premise in the statements derived so far ([`Known`]); each binary rule
//! handles both premise roles so that the worklist closure never misses a
//! pair regardless of insertion order.

use crate::statement::Statement;
use crate::varset::VarSet;

/// Read access to the statements derived so far.
pub trait Known {
    fn contains(&self, s: &Statement) -> bool;

    /// Third components of known statements with the given X and Z.
    fn third_components(&self, x: VarSet, z: VarSet) -> Vec<VarSet>;
}

/// One application: the conclusion and the extra premise a binary rule used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inference {
    pub conclusion: Statement,
    pub partner: Option<Statement>,
}

pub trait Rule: Send + Sync {
    fn name(&self) -> &'static str;

    /// Pushes every conclusion obtainable with `s` as one of the premises.
    fn apply(&self, s: &Statement, known: &dyn Known, out: &mut Vec<Inference>);
}

fn unary(out: &mut Vec<Inference>, conclusion: Statement) {
    out.push(Inference {
        conclusion,
        partner: None,
    });
}

fn binary(out: &mut Vec<Inference>, conclusion: Statement, partner: Statement) {
    out.push(Inference {
        conclusion,
        partner: Some(partner),
    });
}

/// `I(X,Z,Y) => I(Y,Z,X)`
pub struct Symmetry;

impl Rule for Symmetry {
    fn name(&self) -> &'static str {
        "symmetry"
    }

    fn apply(&self, s: &Statement, _: &dyn Known, out: &mut Vec<Inference>) {
        unary(out, s.symmetric());
    }
}

/// `I(X,Z,Y u W) => I(X,Z,Y)`
pub struct Decomposition;

impl Rule for Decomposition {
    fn name(&self) -> &'static str {
        "decomposition"
    }

    fn apply(&self, s: &Statement, _: &dyn Known, out: &mut Vec<Inference>) {
        for y in s.y.proper_nonempty_subsets() {
            unary(out, Statement::new_unchecked(s.x, s.z, y));
        }
    }
}

/// `I(X,Z,Y u W) => I(X,Z u W,Y)`
pub struct WeakUnion;

impl Rule for WeakUnion {
    fn name(&self) -> &'static str {
        "weak-union"
    }

    fn apply(&self, s: &Statement, _: &dyn Known, out: &mut Vec<Inference>) {
        for y in s.y.proper_nonempty_subsets() {
            let w = s.y - y;
            unary(out, Statement::new_unchecked(s.x, s.z | w, y));
        }
    }
}

/// `I(X,Z,Y) & I(X,Z u Y,W) => I(X,Z,Y u W)`
pub struct Contraction;

impl Rule for Contraction {
    fn name(&self) -> &'static str {
        "contraction"
    }

    fn apply(&self, s: &Statement, known: &dyn Known, out: &mut Vec<Inference>) {
        // s as the first premise.
        for w in known.third_components(s.x, s.z | s.y) {
            let partner = Statement::new_unchecked(s.x, s.z | s.y, w);
            binary(out, Statement::new_unchecked(s.x, s.z, s.y | w), partner);
        }
        // s as the second premise: its Z splits into Z' u Y.
        for y in s.z.nonempty_subsets() {
            let partner = Statement::new_unchecked(s.x, s.z - y, y);
            if known.contains(&partner) {
                binary(out, Statement::new_unchecked(s.x, s.z - y, y | s.y), partner);
            }
        }
    }
}

/// `I(X,Z u W,Y) & I(X,Z u Y,W) => I(X,Z,Y u W)`, sound for strictly
/// positive distributions.
pub struct Intersection;

impl Rule for Intersection {
    fn name(&self) -> &'static str {
        "intersection"
    }

    fn apply(&self, s: &Statement, known: &dyn Known, out: &mut Vec<Inference>) {
        // The rule is symmetric in its premises, so treating s as the first
        // one covers both roles.
        for w in s.z.nonempty_subsets() {
            let z = s.z - w;
            let partner = Statement::new_unchecked(s.x, z | s.y, w);
            if known.contains(&partner) {
                binary(out, Statement::new_unchecked(s.x, z, s.y | w), partner);
            }
        }
    }
}

/// `I(X,0,Y) => I(Y,0,X)`
pub struct MSymmetry;

impl Rule for MSymmetry {
    fn name(&self) -> &'static str {
        "m-symmetry"
    }

    fn apply(&self, s: &Statement, _: &dyn Known, out: &mut Vec<Inference>) {
        if s.is_marginal() {
            unary(out, s.symmetric());
        }
    }
}

/// `I(X,0,Y u W) => I(X,0,Y)`
pub struct MDecomposition;

impl Rule for MDecomposition {
    fn name(&self) -> &'static str {
        "m-decomposition"
    }

    fn apply(&self, s: &Statement, known: &dyn Known, out: &mut Vec<Inference>) {
        if s.is_marginal() {
            Decomposition.apply(s, known, out);
        }
    }
}

/// `I(X,0,Y) & I(X u Y,0,W) => I(X,0,Y u W)`
pub struct MMixing;

impl Rule for MMixing {
    fn name(&self) -> &'static str {
        "m-mixing"
    }

    fn apply(&self, s: &Statement, known: &dyn Known, out: &mut Vec<Inference>) {
        if !s.is_marginal() {
            return;
        }
        // s as the first premise.
        for w in known.third_components(s.x | s.y, VarSet::EMPTY) {
            let partner = Statement::new_unchecked(s.x | s.y, VarSet::EMPTY, w);
            binary(
                out,
                Statement::new_unchecked(s.x, VarSet::EMPTY, s.y | w),
                partner,
            );
        }
        // s as the second premise: its X splits into X' u Y.
        for x in s.x.proper_nonempty_subsets() {
            let y = s.x - x;
            let partner = Statement::new_unchecked(x, VarSet::EMPTY, y);
            if known.contains(&partner) {
                binary(
                    out,
                    Statement::new_unchecked(x, VarSet::EMPTY, y | s.y),
                    partner,
                );
            }
        }
    }
}
