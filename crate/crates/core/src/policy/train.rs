use rayon::prelude::*;

use super::{sample_action, ActionPolicy, PolicyWeights, FEATURE_COUNT};
use crate::cem::{self, CemConfig};
use crate::env::{self, LevelConfig, Status};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, salt};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    /// Candidate weight vectors per iteration.
    pub population: usize,
    pub elite_fraction: f64,
    /// Seeded episodes every candidate is scored on.
    pub episodes: usize,
    pub temperature: f64,
    pub init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 30,
            population: 32,
            elite_fraction: 0.25,
            episodes: 16,
            temperature: 1.0,
            init_std: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub total_return: f64,
    pub passed: bool,
    pub moves_used: u32,
    pub goals_cleared_fraction: f64,
}

/// Plays one level from `level_seed` to the end with the given policy and
/// move budget; action sampling uses a stream derived from `policy_seed`.
pub fn play_episode(
    level: &LevelConfig,
    policy: &ActionPolicy,
    move_budget: u32,
    level_seed: u64,
    policy_seed: u64,
) -> Result<EpisodeSummary> {
    let mut state = env::new_level(level, level_seed)?;
    let mut rng = rng_from(&[policy_seed]);
    let mut total = 0.0;
    while state.status() == Status::InProgress {
        let action = sample_action(&state, policy, &mut rng)?;
        let out = env::step(&state, action, move_budget)?;
        total += out.reward;
        state = out.next_state;
    }
    Ok(EpisodeSummary {
        total_return: total,
        passed: state.status() == Status::Won,
        moves_used: state.moves_used(),
        goals_cleared_fraction: state.goals_cleared_fraction(),
    })
}

/// Trains softmax weights with the default settings apart from the
/// iteration and candidate counts.
pub fn train_policy(level: &LevelConfig, iterations: usize, population: usize, seed: u64) -> Result<PolicyWeights> {
    let config = TrainConfig {
        iterations,
        population,
        ..TrainConfig::default()
    };
    train_policy_with(level, &config, seed)
}

/// Cross-entropy search over the feature weights, maximizing the mean
/// episode return under the level's human move budget. Every candidate of
/// an iteration is scored on the same episode seeds.
pub fn train_policy_with(level: &LevelConfig, config: &TrainConfig, seed: u64) -> Result<PolicyWeights> {
    level.validate()?;
    if config.episodes == 0 {
        return Err(Error::config("policy training needs at least one episode"));
    }
    PolicyWeights::new([0.0; FEATURE_COUNT], config.temperature)?;
    let cem_config = CemConfig {
        iterations: config.iterations,
        population: config.population,
        elite_fraction: config.elite_fraction,
        init_mean: vec![0.0; FEATURE_COUNT],
        init_std: vec![config.init_std; FEATURE_COUNT],
        min_std: 0.5,
    };
    let base = derive_seed(&[seed, salt::TRAIN, u64::from(level.level_id)]);
    let outcome = cem::maximize(&cem_config, base, |w, iteration| {
        let Ok(weights) = PolicyWeights::from_slice(w, config.temperature) else {
            return f64::NEG_INFINITY;
        };
        let policy = ActionPolicy::Softmax(weights);
        let returns: Vec<f64> = (0..config.episodes)
            .into_par_iter()
            .map(|e| {
                let level_seed = derive_seed(&[base, iteration as u64, e as u64]);
                play_episode(level, &policy, level.move_budget, level_seed, level_seed ^ 0xA5)
                    .map(|s| s.total_return)
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .collect();
        returns.iter().sum::<f64>() / config.episodes as f64
    })?;
    PolicyWeights::from_slice(&outcome.best, config.temperature)
}
