//! Diagonal-Gaussian cross-entropy method.
//!
//! Candidates are drawn sequentially from one seeded stream and scored in
//! parallel; scoring must be a pure function of `(candidate, iteration)`, so
//! the search result does not depend on the size of the thread pool.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq)]
pub struct CemConfig {
    pub iterations: usize,
    pub population: usize,
    pub elite_fraction: f64,
    pub init_mean: Vec<f64>,
    pub init_std: Vec<f64>,
    /// Floor on the sampling deviation, per dimension.
    pub min_std: f64,
}

impl CemConfig {
    pub fn new(init_mean: Vec<f64>, init_std: Vec<f64>) -> Self {
        CemConfig {
            iterations: 30,
            population: 32,
            elite_fraction: 0.25,
            init_mean,
            init_std,
            min_std: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.population == 0 {
            return Err(Error::config("CEM needs at least one iteration and one candidate"));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(Error::config("elite_fraction must lie in (0, 1]"));
        }
        if self.init_mean.is_empty() || self.init_mean.len() != self.init_std.len() {
            return Err(Error::config("init_mean and init_std must be non-empty and equal length"));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population as f64).ceil() as usize).clamp(1, self.population)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CemOutcome {
    pub best: Vec<f64>,
    pub best_score: f64,
    /// Best score seen in each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Maximizes `score(candidate, iteration)`. NaN scores rank last.
pub fn maximize<F>(config: &CemConfig, seed: u64, score: F) -> Result<CemOutcome>
where
    F: Fn(&[f64], usize) -> f64 + Sync,
{
    config.validate()?;
    let dim = config.init_mean.len();
    let mut mean = config.init_mean.clone();
    let mut std: Vec<f64> = config.init_std.iter().map(|s| s.max(config.min_std)).collect();
    let mut rng = rng_from(&[seed, 0xCE11]);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::with_capacity(config.iterations);
    let elites = config.elite_count();

    for iteration in 0..config.iterations {
        let candidates: Vec<Vec<f64>> = (0..config.population)
            .map(|_| {
                (0..dim)
                    .map(|d| {
                        let z: f64 = rng.sample(StandardNormal);
                        mean[d] + std[d] * z
                    })
                    .collect()
            })
            .collect();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|c| score(c, iteration))
            .map(|s| if s.is_nan() { f64::NEG_INFINITY } else { s })
            .collect();

        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let top = order[0];
        history.push(scores[top]);
        if best.as_ref().is_none_or(|(_, s)| scores[top] > *s) {
            best = Some((candidates[top].clone(), scores[top]));
        }

        let elite = &order[..elites];
        for d in 0..dim {
            let m = elite.iter().map(|&i| candidates[i][d]).sum::<f64>() / elites as f64;
            let var = elite
                .iter()
                .map(|&i| (candidates[i][d] - m).powi(2))
                .sum::<f64>()
                / elites as f64;
            mean[d] = m;
            std[d] = var.sqrt().max(config.min_std);
        }
    }

    let (best, best_score) = best.expect("at least one iteration ran");
    Ok(CemOutcome {
        best,
        best_score,
        history,
        evaluations: config.iterations * config.population,
    })
}
