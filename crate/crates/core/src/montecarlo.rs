//! Simulation study: a fixed pseudo-population, repeated subsampling without
//! replacement, APHBXII refits, and AB/SE/MSE aggregation per parameter and
//! sample size.

use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aphbxii::Aphbxii;
use crate::error::{Error, Result};
use crate::estimation::{fit, FitConfig, ModelKind, PARAMETER_NAMES};
use crate::numeric::CompensatedSum;

pub const PAPER_SAMPLE_SIZES: [usize; 7] = [20, 50, 100, 150, 200, 250, 350];

/// The four reference parameter vectors `(α, c, υ, φ, η)`.
pub fn reference_set(set: usize) -> Result<[f64; 5]> {
    match set {
        1 => Ok([1.8, 0.8, 2.5, 1.0, 2.5]),
        2 => Ok([2.2, 0.6, 1.5, 1.2, 1.8]),
        3 => Ok([1.5, 0.4, 3.0, 0.8, 3.0]),
        4 => Ok([2.5, 0.7, 2.0, 1.5, 2.0]),
        _ => Err(Error::UnknownParameterSet(set)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub true_params: [f64; 5],
    pub population_size: usize,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Each replication also starts from `true_params`; `seed` is overridden
    /// per replication.
    pub fit: FitConfig,
}

impl McConfig {
    /// Full-scale configuration for reference set `set`.
    pub fn reference(set: usize, replications: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            true_params: reference_set(set)?,
            population_size: 20_000,
            sample_sizes: PAPER_SAMPLE_SIZES.to_vec(),
            replications,
            seed,
            fit: FitConfig {
                restarts: 0,
                warm_start: false,
                tolerance: 1e-9,
                ..FitConfig::default()
            },
        })
    }

    fn validate(&self) -> Result<()> {
        Aphbxii::from_slice(&self.true_params)?;
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::domain("no sample sizes given"));
        }
        if let Some(&n) = self
            .sample_sizes
            .iter()
            .find(|&&n| n < 2 || n > self.population_size)
        {
            return Err(Error::domain(format!(
                "sample size {n} must lie in [2, {}]",
                self.population_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub n: usize,
    pub parameter: String,
    pub true_value: f64,
    /// Mean absolute deviation of the estimate from the true value.
    pub ab: f64,
    /// Standard deviation of the estimates (`R − 1` denominator).
    pub se: f64,
    pub mse: f64,
    /// Mean of `θ̂ − θ`.
    pub mean_bias: f64,
    pub successes: usize,
    pub failures: usize,
    /// Successful fits that ended on the optimizer box.
    pub at_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub true_params: [f64; 5],
    pub population_size: usize,
    pub replications: usize,
    pub seed: u64,
    /// Ordered by sample size, then parameter in `(α, c, υ, φ, η)` order.
    pub cells: Vec<McCell>,
}

impl McResult {
    pub fn cell(&self, n: usize, parameter: &str) -> Option<&McCell> {
        self.cells.iter().find(|c| c.n == n && c.parameter == parameter)
    }
}

/// Random stream for replication `rep` of sample-size cell `cell`.
fn replication_rng(seed: u64, cell: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 32) | rep as u64);
    rng
}

struct Replicate {
    estimate: Option<([f64; 5], bool)>,
}

fn replicate(population: &[f64], n: usize, cell: usize, rep: usize, config: &McConfig) -> Replicate {
    let mut rng = replication_rng(config.seed, cell, rep);
    let sample: Vec<f64> = index::sample(&mut rng, population.len(), n)
        .into_iter()
        .map(|i| population[i])
        .collect();
    let fit_config = FitConfig {
        seed: rng.next_u64(),
        start: Some(config.true_params),
        ..config.fit.clone()
    };
    let estimate = fit(&sample, ModelKind::Aphbxii, &fit_config)
        .ok()
        .filter(|f| f.theta.iter().all(|v| v.is_finite()))
        .map(|f| (f.theta, f.at_bound));
    Replicate { estimate }
}

pub fn run_study(config: &McConfig) -> Result<McResult> {
    config.validate()?;
    let truth = Aphbxii::from_slice(&config.true_params)?;
    let population = truth.sample(config.population_size, config.seed)?;

    let mut cells = Vec::new();
    for (ci, &n) in config.sample_sizes.iter().enumerate() {
        let reps: Vec<Replicate> = (0..config.replications)
            .into_par_iter()
            .map(|rep| replicate(&population, n, ci, rep, config))
            .collect();
        let estimates: Vec<([f64; 5], bool)> = reps.iter().filter_map(|r| r.estimate).collect();
        let failed = config.replications - estimates.len();
        if 2 * failed > config.replications {
            return Err(Error::TooManyFailures {
                n,
                failed,
                total: config.replications,
            });
        }
        let at_bound = estimates.iter().filter(|e| e.1).count();
        let r = estimates.len() as f64;
        for (p, name) in PARAMETER_NAMES.iter().enumerate() {
            let truth = config.true_params[p];
            let errors: Vec<f64> = estimates.iter().map(|(th, _)| th[p] - truth).collect();
            let mean_bias = errors.iter().copied().collect::<CompensatedSum>().value() / r;
            let ab = errors.iter().map(|e| e.abs()).collect::<CompensatedSum>().value() / r;
            let mse = errors.iter().map(|e| e * e).collect::<CompensatedSum>().value() / r;
            let se = if estimates.len() > 1 {
                let ss = errors
                    .iter()
                    .map(|e| (e - mean_bias).powi(2))
                    .collect::<CompensatedSum>()
                    .value();
                (ss / (r - 1.0)).sqrt()
            } else {
                0.0
            };
            cells.push(McCell {
                n,
                parameter: name.to_string(),
                true_value: truth,
                ab,
                se,
                mse,
                mean_bias,
                successes: estimates.len(),
                failures: failed,
                at_bound,
            });
        }
    }
    Ok(McResult {
        true_params: config.true_params,
        population_size: config.population_size,
        replications: config.replications,
        seed: config.seed,
        cells,
    })
}
