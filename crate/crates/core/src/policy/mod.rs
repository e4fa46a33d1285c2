//! Rollout policies: uniform random play and a softmax over hand-crafted
//! action features whose weights are trained per level.

mod store;
mod train;

pub use store::{PolicyStore, TrainedPolicy};
pub use train::{play_episode, train_policy, train_policy_with, EpisodeSummary, TrainConfig};

use rand::Rng;

use crate::env::{Action, GameState, Group};
use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 4;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["group_fraction", "goal_progress", "wins_level", "board_cleared"];

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyWeights {
    weights: [f64; FEATURE_COUNT],
    temperature: f64,
}

impl PolicyWeights {
    pub fn new(weights: [f64; FEATURE_COUNT], temperature: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::config("policy weights must be finite"));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::config("policy temperature must be positive"));
        }
        Ok(PolicyWeights { weights, temperature })
    }

    pub fn from_slice(weights: &[f64], temperature: f64) -> Result<Self> {
        let arr: [f64; FEATURE_COUNT] = weights.try_into().map_err(|_| {
            Error::config(format!(
                "expected {FEATURE_COUNT} policy weights, got {}",
                weights.len()
            ))
        })?;
        Self::new(arr, temperature)
    }

    pub fn zeros() -> Self {
        PolicyWeights {
            weights: [0.0; FEATURE_COUNT],
            temperature: 1.0,
        }
    }

    pub fn weights(&self) -> &[f64; FEATURE_COUNT] {
        &self.weights
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    fn score(&self, features: &[f64; FEATURE_COUNT]) -> f64 {
        self.weights.iter().zip(features).map(|(w, f)| w * f).sum::<f64>() / self.temperature
    }
}

/// How rollout actions are picked.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionPolicy {
    Uniform,
    Softmax(PolicyWeights),
}

fn group_features(state: &GameState, group: &Group) -> [f64; FEATURE_COUNT] {
    let cells = state.cells() as f64;
    let remaining = state.goals_remaining();
    let goal_tiles = group.goal_tiles();
    [
        f64::from(group.size) / cells,
        f64::from(goal_tiles.min(remaining)) / f64::from(remaining.max(1)),
        if remaining > 0 && goal_tiles >= remaining { 1.0 } else { 0.0 },
        (f64::from(state.tiles_cleared()) / cells).min(1.0),
    ]
}

/// `[group size / cells, goal tiles in group / goals remaining,
/// 1 if the pop wins, board fraction cleared so far]`, each in `[0, 1]`.
pub fn action_features(state: &GameState, action: Action) -> Result<[f64; FEATURE_COUNT]> {
    if state.status().is_terminal() {
        return Err(Error::contract("features requested for a terminal state"));
    }
    match state.group_at(action) {
        Some(g) if g.size >= 2 => Ok(group_features(state, &g)),
        _ => Err(Error::contract(format!("{action:?} is not a legal action"))),
    }
}

/// The policy's probability for every legal action, in canonical order.
pub fn action_distribution(state: &GameState, policy: &ActionPolicy) -> Result<Vec<(Action, f64)>> {
    if state.status().is_terminal() {
        return Err(Error::contract("action distribution of a terminal state"));
    }
    let groups = state.groups();
    Ok(distribution_over(state, &groups, policy))
}

fn distribution_over(state: &GameState, groups: &[Group], policy: &ActionPolicy) -> Vec<(Action, f64)> {
    match policy {
        ActionPolicy::Uniform => {
            let p = 1.0 / groups.len() as f64;
            groups.iter().map(|g| (g.anchor, p)).collect()
        }
        ActionPolicy::Softmax(w) => {
            let scores: Vec<f64> = groups.iter().map(|g| w.score(&group_features(state, g))).collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let total: f64 = exp.iter().sum();
            groups.iter().zip(exp).map(|(g, e)| (g.anchor, e / total)).collect()
        }
    }
}

/// Draws one legal action.
pub fn sample_action<R: Rng + ?Sized>(state: &GameState, policy: &ActionPolicy, rng: &mut R) -> Result<Action> {
    if state.status().is_terminal() {
        return Err(Error::contract("cannot sample an action in a terminal state"));
    }
    let groups = state.groups();
    if groups.is_empty() {
        return Err(Error::contract("state has no legal action"));
    }
    Ok(match policy {
        ActionPolicy::Uniform => groups[rng.random_range(0..groups.len())].anchor,
        ActionPolicy::Softmax(w) => {
            let scores: Vec<f64> = groups.iter().map(|g| w.score(&group_features(state, g))).collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let total: f64 = exp.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = groups.len() - 1;
            for (i, e) in exp.iter().enumerate() {
                if u < *e {
                    pick = i;
                    break;
                }
                u -= e;
            }
            groups[pick].anchor
        }
    })
}
