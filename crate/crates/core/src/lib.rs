//! Embedded Bayesian networks: mixed graphs with bidirected edges for
//! hidden common causes, checked against exact discrete distributions.

pub mod basis;
pub mod format;
pub mod gen;
pub mod graph;
pub mod graphoid;
pub mod hardness;
pub mod oracle;
pub mod recovery;
pub mod registry;
pub mod separation;
pub mod statement;
pub mod varset;

pub use graph::{etree_isomorphic, EDag, ETree, Edge, Trail};
pub use oracle::{ci_holds, JointTable};
pub use separation::m_separated;
pub use statement::{Statement, StatementSet};
pub use varset::{Universe, VarId, VarSet};
