use serde::{Deserialize, Serialize};

use super::population::{simulate_population, PopulationParams};
use crate::cem::{maximize, CemConfig};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::{derive_seed, salt};

/// Observed pass and churn rate of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTruth {
    pub pass_rate: f64,
    pub churn_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub iterations: usize,
    pub candidates: usize,
    pub elite_fraction: f64,
    /// Players simulated per candidate.
    pub population_size: usize,
    pub max_attempts: u32,
    /// Multiplier on the churn error in the objective.
    pub churn_weight: f64,
    /// Search starts here, in natural units.
    pub start: PopulationParams,
    /// Initial deviation of the log-parameters.
    pub log_std: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            iterations: 20,
            candidates: 64,
            elite_fraction: 0.125,
            population_size: 2_000,
            max_attempts: super::DEFAULT_MAX_ATTEMPTS,
            churn_weight: 1.0,
            start: PopulationParams::default(),
            log_std: 1.0,
        }
    }
}

const LOG_BOUNDS: (f64, f64) = (-5.0, 9.0);

fn from_log(base: &PopulationParams, v: &[f64]) -> PopulationParams {
    let natural: Vec<f64> = v.iter().map(|x| x.clamp(LOG_BOUNDS.0, LOG_BOUNDS.1).exp()).collect();
    base.with_fitted(&natural)
}

/// `(pass_mse + churn_weight * churn_mse) / 2` over levels with truth.
pub fn population_objective(
    difficulties: &[f64],
    truth: &[Option<RateTruth>],
    params: &PopulationParams,
    churn_weight: f64,
    seed: u64,
) -> Result<f64> {
    let out = simulate_population(difficulties, params, seed)?;
    let mut pass = 0.0;
    let mut churn = 0.0;
    let mut n = 0usize;
    for (pred, t) in out.levels.iter().zip(truth) {
        if let Some(t) = t {
            pass += (pred.pass_rate - t.pass_rate).powi(2);
            churn += (pred.churn_rate - t.churn_rate).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InsufficientData("no level carries truth".into()));
    }
    Ok((pass + churn_weight * churn) / (2.0 * n as f64))
}

/// Cross-entropy search over the seven log-parameters, minimizing the
/// objective on the levels that carry truth. Every candidate is simulated
/// with the same seed.
pub fn fit_population<R: Real>(
    difficulties: &[R],
    truth: &[Option<RateTruth>],
    config: &FitConfig,
    seed: u64,
) -> Result<PopulationParams> {
    if difficulties.len() != truth.len() {
        return Err(Error::contract("one truth slot per level is required"));
    }
    let known = truth.iter().flatten().count();
    if known < 5 {
        return Err(Error::InsufficientData(format!("{known} training levels, need at least 5")));
    }
    let base = PopulationParams {
        population_size: config.population_size,
        max_attempts: config.max_attempts,
        ..config.start
    };
    base.validate()?;
    let d: Vec<f64> = difficulties.iter().map(|v| v.as_f64()).collect();
    let sim_seed = derive_seed(&[salt::FIT, seed]);
    let cem = CemConfig {
        iterations: config.iterations,
        population: config.candidates,
        elite_fraction: config.elite_fraction,
        init_mean: base.fitted().iter().map(|v| v.ln()).collect(),
        init_std: vec![config.log_std; PopulationParams::FITTED],
        min_std: 1e-3,
    };
    let outcome = maximize(&cem, seed, |v, _| {
        population_objective(&d, truth, &from_log(&base, v), config.churn_weight, sim_seed)
            .map_or(f64::NEG_INFINITY, |o| -o)
    })?;
    Ok(from_log(&base, &outcome.best))
}
