//! Seeded synthetic score generators with continuous group laws.

use parity_opt::{GroupedScores, WeightedSample1D};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::error::{CliError, CliResult};

/// Parametric family for one group's score law.
#[derive(Debug, Clone, Copy)]
pub enum Family {
    Beta { alpha: f64, beta: f64 },
    /// Gaussian resampled until it lands in [0, 1].
    TruncGauss { mu: f64, sigma: f64 },
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub groups: Vec<(Family, usize)>,
    /// Falls back to `PARITY_OPT_SEED` or 42 when unset.
    pub seed: Option<u64>,
}

/// Seed from the environment override or the built-in default.
pub fn default_seed() -> u64 {
    std::env::var("PARITY_OPT_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(42)
}

impl Family {
    fn sample(&self, rng: &mut ChaCha12Rng) -> CliResult<f64> {
        match *self {
            Family::Beta { alpha, beta } => {
                let dist = Beta::new(alpha, beta).map_err(|e| {
                    CliError::Validation(format!("bad beta parameters: {e}"))
                })?;
                Ok(dist.sample(rng))
            }
            Family::TruncGauss { mu, sigma } => {
                let dist = Normal::new(mu, sigma).map_err(|e| {
                    CliError::Validation(format!("bad gaussian parameters: {e}"))
                })?;
                for _ in 0..100_000 {
                    let x = dist.sample(rng);
                    if (0.0..=1.0).contains(&x) {
                        return Ok(x);
                    }
                }
                Err(CliError::Validation(
                    "gaussian mass in [0, 1] is too small to sample".into(),
                ))
            }
        }
    }
}

/// Samples each group's law; priors proportional to the group sizes.
pub fn synth(spec: &SynthSpec) -> CliResult<GroupedScores> {
    if spec.groups.is_empty() {
        return Err(CliError::Validation("no groups in the synthesis spec".into()));
    }
    let seed = spec.seed.unwrap_or_else(default_seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let total: usize = spec.groups.iter().map(|&(_, n)| n).sum();
    let mut groups = Vec::with_capacity(spec.groups.len());
    let mut priors = Vec::with_capacity(spec.groups.len());
    for &(family, n) in &spec.groups {
        if n < 2 {
            return Err(CliError::Validation(
                "each group needs at least two samples".into(),
            ));
        }
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(family.sample(&mut rng)?);
        }
        groups.push(WeightedSample1D::from_samples(&values)?);
        priors.push(n as f64 / total as f64);
    }
    Ok(GroupedScores::new(groups, priors)?)
}

/// Convenience used across the test suites: `K` beta groups, `n` points each.
pub fn beta_groups(params: &[(f64, f64)], n: usize, seed: u64) -> GroupedScores {
    let spec = SynthSpec {
        groups: params
            .iter()
            .map(|&(a, b)| (Family::Beta { alpha: a, beta: b }, n))
            .collect(),
        seed: Some(seed),
    };
    synth(&spec).expect("valid beta parameters")
}
