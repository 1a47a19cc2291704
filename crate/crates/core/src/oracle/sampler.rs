//! Random distributions that factor according to an E-tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::ETree;
use crate::separation::LatentDag;
use crate::statement::Statement;
use crate::varset::VarSet;

use super::{advance, ci_residual, JointTable, OracleError};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub domain: usize,
    pub latent_domain: usize,
    /// Lower bound on every conditional probability.
    pub cpt_floor: f64,
    /// Marginal dependence every trek-connected pair must show, measured as
    /// the largest Eq.-(1) residual of `I(a, 0, b)`.
    pub wellrep_margin: f64,
    pub max_retries: usize,
    pub max_observables: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            domain: 2,
            latent_domain: 2,
            cpt_floor: 0.05,
            wellrep_margin: 1e-3,
            max_retries: 100,
            max_observables: 12,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..SamplerConfig::default()
        }
    }

    fn validate(&self) -> Result<(), SamplerError> {
        let bad = |msg: &str| Err(SamplerError::InvalidConfig(msg.to_string()));
        if self.domain < 2 || self.latent_domain < 2 {
            return bad("domains must have at least 2 values");
        }
        let widest = self.domain.max(self.latent_domain) as f64;
        if !(self.cpt_floor > 0.0 && self.cpt_floor < 1.0 / widest) {
            return bad("cpt_floor must lie strictly between 0 and 1/domain");
        }
        if self.wellrep_margin.is_nan() || self.wellrep_margin <= 0.0 {
            return bad("wellrep_margin must be positive");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("{size} observables exceed the sampler cap of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },
    #[error(
        "no acceptable distribution after {retries} attempts; last failure: {reason}"
    )]
    RetriesExhausted { retries: usize, reason: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Conditional probability table of one vertex of the latent dag.
struct Cpt {
    parents: Vec<usize>,
    /// `rows[config * domain + value]`
    probs: Vec<f64>,
    domain: usize,
}

/// Samples a strictly positive distribution over the observables of `t`
/// whose independencies include everything `t` implies and whose
/// trek-connected pairs are all marginally dependent.
///
/// Every vertex of the latent expansion of `t` gets a random conditional
/// table; the product is summed over the latents. Attempts that miss the
/// dependence margin are retried on a fresh stream of the same seed, so
/// the result depends only on `cfg`.
pub fn sample_from_etree(t: &ETree, cfg: &SamplerConfig) -> Result<JointTable, SamplerError> {
    cfg.validate()?;
    let n = t.len();
    if n > cfg.max_observables {
        return Err(SamplerError::UniverseTooLarge {
            size: n,
            limit: cfg.max_observables,
        });
    }
    let dag = LatentDag::new(t);
    let domains: Vec<usize> = (0..dag.len())
        .map(|v| if v < n { cfg.domain } else { cfg.latent_domain })
        .collect();
    let variables: Vec<(String, usize)> = t
        .universe()
        .names()
        .iter()
        .map(|name| (name.clone(), cfg.domain))
        .collect();
    let treks = t.trek_pairs();

    let mut reason = String::new();
    for attempt in 0..cfg.max_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(attempt as u64);
        let cpts: Vec<Cpt> = (0..dag.len())
            .map(|v| random_cpt(&mut rng, dag.parents_of(v), &domains, v, cfg.cpt_floor))
            .collect();
        let probs = joint(&cpts, &domains, n);
        let table = JointTable::new(variables.clone(), probs)?;

        if let Some(a) = table.first_zero_row() {
            reason = format!("row {a:?} has probability 0");
            continue;
        }
        let mut weak = None;
        for &(a, b) in &treks {
            let s = Statement::new_unchecked(VarSet::singleton(a), VarSet::EMPTY, VarSet::singleton(b));
            let r = ci_residual(&table, &s)?;
            if r <= cfg.wellrep_margin {
                weak = Some((a, b, r));
                break;
            }
        }
        match weak {
            None => return Ok(table),
            Some((a, b, r)) => {
                reason = format!(
                    "trek-connected `{}` and `{}` have dependence residual {r:.3e}",
                    t.name(a),
                    t.name(b)
                );
            }
        }
    }
    Err(SamplerError::RetriesExhausted {
        retries: cfg.max_retries,
        reason,
    })
}

fn random_cpt(rng: &mut ChaCha8Rng, parents: &[usize], domains: &[usize], v: usize, floor: f64) -> Cpt {
    let domain = domains[v];
    let configs: usize = parents.iter().map(|&p| domains[p]).product();
    let mut probs = Vec::with_capacity(configs * domain);
    let spread = 1.0 - floor * domain as f64;
    for _ in 0..configs {
        let draws: Vec<f64> = (0..domain).map(|_| rng.random::<f64>() + f64::EPSILON).collect();
        let total: f64 = draws.iter().sum();
        // Uniform draws, normalized, then lifted so every entry is >= floor.
        probs.extend(draws.iter().map(|d| floor + spread * d / total));
    }
    Cpt {
        parents: parents.to_vec(),
        probs,
        domain,
    }
}

/// Sums the product of all tables over latent assignments, for every
/// observable assignment in row-major order.
fn joint(cpts: &[Cpt], domains: &[usize], observables: usize) -> Vec<f64> {
    let obs_domains = &domains[..observables];
    let latent_domains = &domains[observables..];
    let rows: usize = obs_domains.iter().product();
    let latent_rows: usize = latent_domains.iter().product();
    let mut values = vec![0usize; domains.len()];
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut total = 0.0;
        values[observables..].iter_mut().for_each(|v| *v = 0);
        for _ in 0..latent_rows {
            let mut p = 1.0;
            for (v, cpt) in cpts.iter().enumerate() {
                let mut config = 0;
                for &q in &cpt.parents {
                    config = config * domains[q] + values[q];
                }
                p *= cpt.probs[config * cpt.domain + values[v]];
            }
            total += p;
            advance(&mut values[observables..], latent_domains);
        }
        out.push(total);
        advance(&mut values[..observables], obs_domains);
    }
    out
}
