//! Monte Carlo tree search with UCT selection, policy or uniform rollouts and
//! discounted backpropagation.
//!
//! Node values use the convention `V̂(node) = r(node) + γ·V̂(next)`, where
//! `r(node)` is the reward received on entering the node and `next` is the
//! following node on the backed-up path (or the rollout return below a
//! leaf). `V(child) / N(child)` is therefore the mean discounted return of
//! taking the child's action.

mod colorpop;
mod play;
mod tree;

pub use colorpop::ColorPop;
pub use play::{play_level, play_level_traced, AgentKind, AgentSpec, Dynamics, PlayTrace};
pub use tree::{rollout, uct_score, NodeId, SearchNode, SearchTree};

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::seed::StreamRng;

/// A finite-action decision process with deterministic transitions.
pub trait Mdp {
    type State: Clone + PartialEq;
    type Action: Copy + Ord + Debug;

    /// Legal actions in canonical order; empty only for terminal states.
    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;
    fn step(&self, state: &Self::State, action: Self::Action) -> (Self::State, f64);
    fn is_terminal(&self, state: &Self::State) -> bool;
}

/// Picks rollout actions.
pub trait RolloutPolicy<M: Mdp> {
    /// `None` when the state offers no action.
    fn choose(&self, mdp: &M, state: &M::State, rng: &mut StreamRng) -> Option<M::Action>;
}

/// Uniformly random rollouts, for any process.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRollout;

impl<M: Mdp> RolloutPolicy<M> for UniformRollout {
    fn choose(&self, mdp: &M, state: &M::State, rng: &mut StreamRng) -> Option<M::Action> {
        use rand::Rng;
        let actions = mdp.actions(state);
        (!actions.is_empty()).then(|| actions[rng.random_range(0..actions.len())])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutKind {
    Uniform,
    Learned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantConfig {
    pub rollout_policy: RolloutKind,
    /// Discount used in rollouts and backpropagation.
    pub gamma: f64,
    /// UCT exploration constant.
    pub c: f64,
    /// Search iterations per decision.
    pub budget: usize,
    /// Maximum moves per rollout.
    pub rollout_cap: usize,
    /// Moves allowed for the whole level; `None` means the level's human
    /// budget (times the agent's multiplier, see [`AgentKind`]).
    pub agent_move_budget: Option<u32>,
}

pub const DEFAULT_BUDGET: usize = 200;
pub const DEFAULT_ROLLOUT_CAP: usize = 10;
pub const MYOPIC_GAMMA: f64 = 0.9;
pub const DEFAULT_C: f64 = std::f64::consts::SQRT_2;

impl VariantConfig {
    pub fn new(rollout_policy: RolloutKind, gamma: f64) -> Self {
        VariantConfig {
            rollout_policy,
            gamma,
            c: DEFAULT_C,
            budget: DEFAULT_BUDGET,
            rollout_cap: DEFAULT_ROLLOUT_CAP,
            agent_move_budget: None,
        }
    }

    pub fn vanilla() -> Self {
        Self::new(RolloutKind::Uniform, 1.0)
    }

    pub fn policy() -> Self {
        Self::new(RolloutKind::Learned, 1.0)
    }

    pub fn myopic() -> Self {
        Self::new(RolloutKind::Uniform, MYOPIC_GAMMA)
    }

    pub fn policy_myopic() -> Self {
        Self::new(RolloutKind::Learned, MYOPIC_GAMMA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(format!("gamma={} outside (0, 1]", self.gamma)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::config(format!("c={} must be finite and >= 0", self.c)));
        }
        if self.budget < 1 || self.rollout_cap < 1 {
            return Err(Error::config("budget and rollout_cap must be >= 1"));
        }
        if self.agent_move_budget == Some(0) {
            return Err(Error::config("agent_move_budget must be >= 1"));
        }
        Ok(())
    }
}
