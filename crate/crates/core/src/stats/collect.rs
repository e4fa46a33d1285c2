use rayon::prelude::*;

use super::RunRecord;
use crate::env::LevelConfig;
use crate::error::Result;
use crate::mcts::{play_level, AgentSpec};
use crate::policy::{PolicyStore, PolicyWeights};
use crate::seed::{derive_seed, salt};

pub const DEFAULT_SEARCH_RUNS: usize = 20;
pub const DEFAULT_POLICY_RUNS: usize = 1000;

pub fn run_seed(master_seed: u64, level_id: u32, run_index: usize) -> u64 {
    derive_seed(&[salt::RUN, master_seed, level_id as u64, run_index as u64])
}

/// Plays `n_runs` episodes of every level, level-major, in parallel on the
/// current rayon pool. Output order and content do not depend on the pool.
pub fn collect_runs(
    levels: &[LevelConfig],
    agent: &AgentSpec,
    weights: Option<&PolicyStore>,
    n_runs: usize,
    master_seed: u64,
) -> Result<Vec<RunRecord>> {
    if n_runs == 0 {
        return Err(crate::Error::contract("n_runs must be at least 1"));
    }
    agent.config.validate()?;
    let per_level: Vec<Option<PolicyWeights>> = levels
        .iter()
        .map(|l| {
            if agent.kind.needs_weights() {
                let store = weights.ok_or(crate::Error::MissingWeights(l.level_id))?;
                store.weights_for(l.level_id).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..levels.len())
        .flat_map(|l| (0..n_runs).map(move |r| (l, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(l, r)| {
            let level = &levels[l];
            play_level(level, agent, per_level[l].as_ref(), run_seed(master_seed, level.level_id, r))
        })
        .collect()
}
