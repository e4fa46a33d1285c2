use std::fmt;
use std::str::FromStr;

use super::{ColorPop, RolloutKind, SearchTree, UniformRollout, VariantConfig};
use crate::env::{self, LevelConfig, Status};
use crate::error::{Error, Result};
use crate::policy::{sample_action, ActionPolicy, PolicyWeights};
use crate::seed::{rng_from, salt};
use crate::stats::RunRecord;

use rand::Rng;

/// The four search variants plus the policy playing on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Vanilla,
    Policy,
    Myopic,
    PolicyMyopic,
    PolicyOnly,
}

impl AgentKind {
    pub const SEARCH: [AgentKind; 4] = [
        AgentKind::Vanilla,
        AgentKind::Policy,
        AgentKind::Myopic,
        AgentKind::PolicyMyopic,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AgentKind::Vanilla => "vanilla",
            AgentKind::Policy => "policy",
            AgentKind::Myopic => "myopic",
            AgentKind::PolicyMyopic => "policy-myopic",
            AgentKind::PolicyOnly => "policy-only",
        }
    }

    pub fn needs_weights(self) -> bool {
        !matches!(self, AgentKind::Vanilla | AgentKind::Myopic)
    }

    /// The policy-only agent gets four times the human move budget; search
    /// agents play with the human budget.
    pub fn budget_multiplier(self) -> u32 {
        if self == AgentKind::PolicyOnly {
            4
        } else {
            1
        }
    }

    pub fn default_config(self) -> VariantConfig {
        match self {
            AgentKind::Vanilla => VariantConfig::vanilla(),
            AgentKind::Policy | AgentKind::PolicyOnly => VariantConfig::policy(),
            AgentKind::Myopic => VariantConfig::myopic(),
            AgentKind::PolicyMyopic => VariantConfig::policy_myopic(),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [AgentKind::PolicyOnly]
            .into_iter()
            .chain(AgentKind::SEARCH)
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::config(format!("unknown agent '{s}'")))
    }
}

/// How the real game evolves after a committed move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    /// The committed move lands exactly where the search predicted.
    Deterministic,
    /// Refills after a committed move come from a stream the agent never
    /// sees, so the search's cached successor is only a guess.
    #[default]
    HiddenRefill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub config: VariantConfig,
    pub dynamics: Dynamics,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        AgentSpec {
            kind,
            config: kind.default_config(),
            dynamics: Dynamics::default(),
        }
    }

    pub fn move_budget(&self, level: &LevelConfig) -> u32 {
        self.config
            .agent_move_budget
            .unwrap_or(level.move_budget * self.kind.budget_multiplier())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayTrace {
    pub record: RunRecord,
    /// Deepest node of the search tree at each decision.
    pub decision_depths: Vec<usize>,
    /// Decisions that started from a retained subtree.
    pub reused_subtrees: usize,
}

/// Plays one level to the end and reports the outcome.
pub fn play_level(
    level: &LevelConfig,
    agent: &AgentSpec,
    weights: Option<&PolicyWeights>,
    seed: u64,
) -> Result<RunRecord> {
    play_level_traced(level, agent, weights, seed).map(|t| t.record)
}

pub fn play_level_traced(
    level: &LevelConfig,
    agent: &AgentSpec,
    weights: Option<&PolicyWeights>,
    seed: u64,
) -> Result<PlayTrace> {
    agent.config.validate()?;
    let learned = agent.kind.needs_weights() || agent.config.rollout_policy == RolloutKind::Learned;
    let policy = match (learned, weights) {
        (true, Some(w)) => ActionPolicy::Softmax(w.clone()),
        (true, None) => return Err(Error::MissingWeights(level.level_id)),
        (false, _) => ActionPolicy::Uniform,
    };
    let budget = agent.move_budget(level);
    let mut state = env::new_level(level, seed)?;
    let mut hidden = rng_from(&[seed, salt::RUN, 2]);
    let mut depths = Vec::new();
    let mut reused = 0;

    let commit = |state: &env::GameState, action, hidden: &mut crate::seed::StreamRng| {
        let mut real = state.clone();
        if agent.dynamics == Dynamics::HiddenRefill {
            real.reseed(hidden.random());
        }
        env::step(&real, action, budget).map(|o| o.next_state)
    };

    if agent.kind == AgentKind::PolicyOnly {
        let mut rng = rng_from(&[seed, salt::RUN, 1]);
        while state.status() == Status::InProgress {
            let action = sample_action(&state, &policy, &mut rng)?;
            state = commit(&state, action, &mut hidden)?;
        }
    } else {
        let mdp = ColorPop { move_budget: budget };
        let uniform = UniformRollout;
        let rollout: &dyn super::RolloutPolicy<ColorPop> = if learned { &policy } else { &uniform };
        let mut tree: SearchTree<'_, ColorPop, f64> =
            SearchTree::new(mdp, state.clone(), agent.config.clone(), rollout, rng_from(&[seed, salt::RUN, 1]))?;
        while state.status() == Status::InProgress {
            if tree.root().visits > 0 {
                reused += 1;
            }
            let action = tree.decide()?;
            depths.push(tree.max_depth());
            state = commit(&state, action, &mut hidden)?;
            if state.status() == Status::InProgress {
                tree.advance(action, state.clone());
            }
        }
    }

    let passed = state.status() == Status::Won;
    let record = RunRecord {
        level_id: level.level_id,
        seed,
        agent: agent.kind.tag().to_string(),
        passed,
        moves_used: state.moves_used(),
        moves_left: if passed { budget - state.moves_used() } else { 0 },
        goals_cleared_fraction: state.goals_cleared_fraction(),
    };
    Ok(PlayTrace {
        record,
        decision_depths: depths,
        reused_subtrees: reused,
    })
}
