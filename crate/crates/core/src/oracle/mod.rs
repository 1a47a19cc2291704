//! Exact discrete joint distributions and conditional-independence tests.

mod sampler;

pub use sampler::{sample_from_etree, SamplerConfig, SamplerError};

use crate::statement::{Statement, StatementError};
use crate::varset::{Universe, UniverseError, VarId, VarSet};

/// Allowed deviation of a table's total mass from 1.
pub const TOL_SUM: f64 = 1e-9;
/// Default absolute residual tolerance for [`ci_holds`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest dense table we are willing to allocate.
pub const MAX_ROWS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error("variable `{0}` has domain size {1}; at least 2 is required")]
    DomainTooSmall(String, usize),
    #[error("expected {expected} probabilities, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("probability {value} at row {row} is negative or not finite")]
    BadProbability { row: usize, value: f64 },
    #[error("probabilities sum to {0}, not 1")]
    BadTotal(f64),
    #[error("table would have more than {MAX_ROWS} rows")]
    TooLarge,
    #[error("cannot marginalize onto an empty set of variables")]
    EmptyKeepSet,
    #[error("variables do not match the table: {0}")]
    VariableMismatch(String),
    #[error("invalid statement: {0}")]
    InvalidStatement(#[from] StatementError),
}

/// A joint distribution over finite-domain variables, stored densely in
/// row-major order (the last variable varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    universe: Universe,
    domains: Vec<usize>,
    strides: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(variables: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self, OracleError> {
        let table = JointTable::unchecked(variables, probs)?;
        for (row, &p) in table.probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(OracleError::BadProbability { row, value: p });
            }
        }
        let total: f64 = table.probs.iter().sum();
        if (total - 1.0).abs() > TOL_SUM {
            return Err(OracleError::BadTotal(total));
        }
        Ok(table)
    }

    /// Shape checks only; used for intermediate marginals.
    fn unchecked(variables: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self, OracleError> {
        let (names, domains): (Vec<String>, Vec<usize>) = variables.into_iter().unzip();
        for (name, &d) in names.iter().zip(&domains) {
            if d < 2 {
                return Err(OracleError::DomainTooSmall(name.clone(), d));
            }
        }
        let universe = Universe::new(names)?;
        let rows = row_count(&domains).ok_or(OracleError::TooLarge)?;
        if probs.len() != rows {
            return Err(OracleError::WrongLength {
                expected: rows,
                got: probs.len(),
            });
        }
        let strides = strides(&domains);
        Ok(JointTable {
            universe,
            domains,
            strides,
            probs,
        })
    }

    /// Builds a table by evaluating `f` on every assignment.
    pub fn from_fn(
        variables: Vec<(String, usize)>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self, OracleError> {
        let domains: Vec<usize> = variables.iter().map(|(_, d)| *d).collect();
        let rows = row_count(&domains).ok_or(OracleError::TooLarge)?;
        let mut probs = Vec::with_capacity(rows);
        let mut a = vec![0usize; domains.len()];
        for _ in 0..rows {
            probs.push(f(&a));
            advance(&mut a, &domains);
        }
        JointTable::new(variables, probs)
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

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn variables(&self) -> Vec<(String, usize)> {
        self.universe
            .names()
            .iter()
            .cloned()
            .zip(self.domains.iter().copied())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.probs.len()
    }

    /// Row index of a full assignment.
    pub fn index(&self, assignment: &[usize]) -> usize {
        assignment
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    /// Full assignment of a row index.
    pub fn assignment(&self, mut row: usize) -> Vec<usize> {
        let mut a = vec![0; self.domains.len()];
        for i in (0..self.domains.len()).rev() {
            a[i] = row % self.domains[i];
            row /= self.domains[i];
        }
        a
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.probs[self.index(assignment)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// First row with zero probability, as a full assignment.
    pub fn first_zero_row(&self) -> Option<Vec<usize>> {
        self.probs
            .iter()
            .position(|&p| p <= 0.0)
            .map(|r| self.assignment(r))
    }

    /// Exact marginal over `keep`, with variables in table order.
    pub fn marginal(&self, keep: VarSet) -> Result<JointTable, OracleError> {
        if keep.is_empty() {
            return Err(OracleError::EmptyKeepSet);
        }
        self.check_vars(keep)?;
        let kept: Vec<VarId> = keep.iter().collect();
        let variables = kept
            .iter()
            .map(|&v| (self.universe.name(v).to_string(), self.domains[v.index()]))
            .collect();
        JointTable::unchecked(variables, self.marginal_probs(&kept))
    }

    /// Marginal probabilities of `kept` (in the given order), row-major.
    fn marginal_probs(&self, kept: &[VarId]) -> Vec<f64> {
        let dims: Vec<usize> = kept.iter().map(|v| self.domains[v.index()]).collect();
        let target_strides = strides(&dims);
        let mut out = vec![0.0; dims.iter().product()];
        // Contribution of each source variable to the target index.
        let mut weight = vec![0usize; self.domains.len()];
        for (k, v) in kept.iter().enumerate() {
            weight[v.index()] = target_strides[k];
        }
        let mut a = vec![0usize; self.domains.len()];
        let mut t = 0usize;
        for &p in &self.probs {
            out[t] += p;
            // Odometer increment, keeping the target index in sync.
            for i in (0..a.len()).rev() {
                a[i] += 1;
                t += weight[i];
                if a[i] < self.domains[i] {
                    break;
                }
                t -= weight[i] * a[i];
                a[i] = 0;
            }
        }
        out
    }

    fn check_vars(&self, set: VarSet) -> Result<(), OracleError> {
        if let Some(v) = (set - self.universe.all()).first() {
            return Err(OracleError::VariableMismatch(format!(
                "variable #{} outside a table of {} variables",
                v.index(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Maps each variable of `universe` to the table variable of the same
    /// name. Both must contain exactly the same names.
    pub fn align(&self, universe: &Universe) -> Result<Vec<VarId>, OracleError> {
        if universe.len() != self.len() {
            return Err(OracleError::VariableMismatch(format!(
                "{} variables versus {} in the table",
                universe.len(),
                self.len()
            )));
        }
        universe
            .names()
            .iter()
            .map(|n| {
                self.universe
                    .lookup(n)
                    .ok_or_else(|| OracleError::VariableMismatch(format!("`{n}` is not in the table")))
            })
            .collect()
    }
}

fn row_count(domains: &[usize]) -> Option<usize> {
    domains
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&r| r <= MAX_ROWS)
}

fn strides(domains: &[usize]) -> Vec<usize> {
    let mut s = vec![1; domains.len()];
    for i in (0..domains.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * domains[i + 1];
    }
    s
}

pub(crate) fn advance(a: &mut [usize], domains: &[usize]) {
    for i in (0..a.len()).rev() {
        a[i] += 1;
        if a[i] < domains[i] {
            return;
        }
        a[i] = 0;
    }
}

/// Outcome of a conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub holds: bool,
    /// `max |P(x,y,z) P(z) - P(x,z) P(y,z)|` over all value combinations.
    pub residual: f64,
}

/// Tests `P(x,y,z) P(z) = P(x,z) P(y,z)` for every value combination, up
/// to an absolute tolerance.
pub fn ci_holds(p: &JointTable, s: &Statement, tol: f64) -> Result<CiResult, OracleError> {
    let residual = ci_residual(p, s)?;
    Ok(CiResult {
        holds: residual <= tol,
        residual,
    })
}

/// Largest Eq.-(1) discrepancy of `s` in `p`.
pub fn ci_residual(p: &JointTable, s: &Statement) -> Result<f64, OracleError> {
    s.check()?;
    p.check_vars(s.vars())?;
    // Order the joint marginal as X, Y, Z so the sub-marginals are simple
    // index projections.
    let xs: Vec<VarId> = s.x.iter().collect();
    let ys: Vec<VarId> = s.y.iter().collect();
    let zs: Vec<VarId> = s.z.iter().collect();
    let order: Vec<VarId> = xs.iter().chain(&ys).chain(&zs).copied().collect();
    let pxyz = p.marginal_probs(&order);

    let dom = |vs: &[VarId]| vs.iter().map(|v| p.domains[v.index()]).product::<usize>();
    let (nx, ny, nz) = (dom(&xs), dom(&ys), dom(&zs));

    // Row-major over (x, y, z): index = (x * ny + y) * nz + z.
    let mut pz = vec![0.0; nz];
    let mut pxz = vec![0.0; nx * nz];
    let mut pyz = vec![0.0; ny * nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let v = pxyz[(x * ny + y) * nz + z];
                pz[z] += v;
                pxz[x * nz + z] += v;
                pyz[y * nz + z] += v;
            }
        }
    }
    let mut worst = 0.0f64;
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let lhs = pxyz[(x * ny + y) * nz + z] * pz[z];
                let rhs = pxz[x * nz + z] * pyz[y * nz + z];
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Exact marginal of `p` over `keep`.
pub fn marginal(p: &JointTable, keep: VarSet) -> Result<JointTable, OracleError> {
    p.marginal(keep)
}

pub fn is_strictly_positive(p: &JointTable) -> bool {
    p.is_strictly_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(names: &[&str]) -> Vec<(String, usize)> {
        names.iter().map(|n| (n.to_string(), 2)).collect()
    }

    fn st(p: &JointTable, x: &[&str], z: &[&str], y: &[&str]) -> Statement {
        let f = |ns: &[&str]| ns.iter().map(|n| p.universe().lookup(n).unwrap()).collect();
        Statement::new(f(x), f(z), f(y)).unwrap()
    }

    /// Fair coins a and c with b = a xor c, variables ordered (a, b, c).
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

    fn parity(eps: f64, delta: f64) -> JointTable {
        JointTable::from_fn(binary(&["x1", "x2", "x3"]), |v| {
            let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            (1.0 + eps * sign(v[0] + v[1] + v[2]) + delta * sign(v[1] + v[2])) / 8.0
        })
        .unwrap()
    }

    /// Eq. (1) by brute force over full assignments, independent of the
    /// marginalization code.
    fn brute_residual(p: &JointTable, s: &Statement) -> f64 {
        let rows: Vec<(Vec<usize>, f64)> =
            (0..p.rows()).map(|r| (p.assignment(r), p.probs()[r])).collect();
        let agree = |a: &[usize], b: &[usize], set: VarSet| set.iter().all(|v| a[v.index()] == b[v.index()]);
        let sum = |target: &[usize], set: VarSet| {
            rows.iter()
                .filter(|(a, _)| agree(a, target, set))
                .map(|(_, q)| q)
                .sum::<f64>()
        };
        let mut worst = 0.0f64;
        for (a, _) in &rows {
            let lhs = sum(a, s.x | s.y | s.z) * sum(a, s.z);
            let rhs = sum(a, s.x | s.z) * sum(a, s.y | s.z);
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    #[test]
    fn uniform_pair_is_independent() {
        let p = JointTable::from_fn(binary(&["a", "b"]), |_| 0.25).unwrap();
        assert!(ci_holds(&p, &st(&p, &["a"], &[], &["b"]), DEFAULT_TOL).unwrap().holds);
    }

    #[test]
    fn xor_examples() {
        let p = xor();
        let marg = st(&p, &["a"], &[], &["c"]);
        let cond = st(&p, &["a"], &["b"], &["c"]);
        assert!(ci_holds(&p, &marg, DEFAULT_TOL).unwrap().holds);
        let r = ci_holds(&p, &cond, DEFAULT_TOL).unwrap();
        assert!(!r.holds);
        assert!((r.residual - brute_residual(&p, &cond)).abs() < 1e-15);
        // P(a,c,b) P(b) - P(a,b) P(c,b) = 1/4 * 1/2 - 1/4 * 1/4.
        assert!((r.residual - 0.0625).abs() < 1e-15);
        assert!(!p.is_strictly_positive());
    }

    #[test]
    fn parity_examples() {
        let p = parity(0.4, 0.4);
        let s12 = st(&p, &["x1"], &[], &["x2"]);
        let s23 = st(&p, &["x2"], &[], &["x3"]);
        let s12_3 = st(&p, &["x1"], &["x3"], &["x2"]);
        assert!(ci_holds(&p, &s12, DEFAULT_TOL).unwrap().holds);
        let r23 = ci_holds(&p, &s23, DEFAULT_TOL).unwrap();
        assert!(!r23.holds);
        // |P(x2,x3) - P(x2) P(x3)| = delta / 4.
        assert!((r23.residual - brute_residual(&p, &s23)).abs() < 1e-15);
        assert!((r23.residual - 0.4 / 4.0).abs() < 1e-15);
        let r = ci_holds(&p, &s12_3, DEFAULT_TOL).unwrap();
        assert!(!r.holds);
        assert!((r.residual - brute_residual(&p, &s12_3)).abs() < 1e-15);
        assert!(p.is_strictly_positive());
    }

    #[test]
    fn residuals_match_brute_force_everywhere() {
        let p = parity(0.3, 0.1);
        for s in crate::statement::all_statements(3) {
            let fast = ci_residual(&p, &s).unwrap();
            let slow = brute_residual(&p, &s);
            assert!((fast - slow).abs() < 1e-15, "{s:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn marginal_examples() {
        let u = JointTable::from_fn(binary(&["x1", "x2", "x3"]), |_| 0.125).unwrap();
        let m = u.marginal(VarSet::singleton(VarId::new(0))).unwrap();
        assert_eq!(m.probs(), [0.5, 0.5]);

        let (eps, delta) = (0.4, 0.4);
        let p = parity(eps, delta);
        let keep = VarSet::from_bits(0b110);
        let m = p.marginal(keep).unwrap();
        assert_eq!(m.universe().names(), ["x2", "x3"]);
        for x2 in 0..2 {
            for x3 in 0..2 {
                let sign = if (x2 + x3) % 2 == 0 { 1.0 } else { -1.0 };
                let expect = (1.0 + delta * sign) / 4.0;
                assert!((m.prob(&[x2, x3]) - expect).abs() < 1e-15);
            }
        }
        assert_eq!(p.marginal(p.universe().all()).unwrap(), p);
        assert_eq!(p.marginal(VarSet::EMPTY), Err(OracleError::EmptyKeepSet));
        assert!(matches!(
            p.marginal(VarSet::from_bits(0b1000)),
            Err(OracleError::VariableMismatch(_))
        ));
    }

    #[test]
    fn positivity_examples() {
        let u = JointTable::from_fn(binary(&["a", "b"]), |_| 0.25).unwrap();
        assert!(is_strictly_positive(&u));
        assert!(!is_strictly_positive(&xor()));
        assert_eq!(xor().first_zero_row(), Some(vec![0, 0, 1]));
        // Smallest entry is (1 - eps - delta) / 8.
        assert!(is_strictly_positive(&parity(0.5, 0.49)));
        assert!(!is_strictly_positive(&parity(0.5, 0.5)));
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            JointTable::new(binary(&["a"]), vec![0.5, 0.6]),
            Err(OracleError::BadTotal(_))
        ));
        assert!(matches!(
            JointTable::new(binary(&["a"]), vec![1.5, -0.5]),
            Err(OracleError::BadProbability { row: 1, .. })
        ));
        assert!(matches!(
            JointTable::new(binary(&["a"]), vec![1.0]),
            Err(OracleError::WrongLength { expected: 2, got: 1 })
        ));
        assert!(matches!(
            JointTable::new(vec![("a".into(), 1)], vec![1.0]),
            Err(OracleError::DomainTooSmall(_, 1))
        ));
    }

    #[test]
    fn non_binary_domains() {
        let vars = vec![("a".to_string(), 3), ("b".to_string(), 2)];
        let p = JointTable::from_fn(vars, |v| [0.1, 0.2, 0.3][v[0]] * [0.25, 0.75][v[1]] / 0.6)
            .unwrap();
        assert_eq!(p.rows(), 6);
        assert_eq!(p.assignment(5), vec![2, 1]);
        assert_eq!(p.index(&[2, 1]), 5);
        assert!(ci_holds(&p, &st(&p, &["a"], &[], &["b"]), DEFAULT_TOL).unwrap().holds);
    }

    #[test]
    fn align_by_name() {
        let p = parity(0.1, 0.1);
        let u = Universe::new(["x3", "x1", "x2"]).unwrap();
        let map = p.align(&u).unwrap();
        assert_eq!(map, vec![VarId::new(2), VarId::new(0), VarId::new(1)]);
        let bad = Universe::new(["x3", "x1", "q"]).unwrap();
        assert!(p.align(&bad).is_err());
    }
}
