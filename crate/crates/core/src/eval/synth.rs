use super::GroundTruthRecord;
use crate::env::LevelConfig;
use crate::error::{Error, Result};
use crate::mcts::{AgentKind, AgentSpec};
use crate::policy::PolicyStore;
use crate::predict::{normalize_difficulty, simulate_population, PopulationParams};
use crate::stats::{best_run_subset, collect_runs, describe::mean, LevelRuns, RankKey};
use crate::seed::{derive_seed, salt};

/// How the oracle turns an agent sweep into a capability score per level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBlend {
    pub pass_weight: f64,
    pub moves_weight: f64,
    /// Best-run fraction for the moves-left term.
    pub top_fraction: f64,
}

impl Default for OracleBlend {
    fn default() -> Self {
        OracleBlend {
            pass_weight: 0.5,
            moves_weight: 0.5,
            top_fraction: 0.15,
        }
    }
}

/// Trait distributions of the synthetic players.
pub fn reference_truth_params() -> PopulationParams {
    PopulationParams {
        skill_alpha: 6.0,
        skill_beta: 2.0,
        persistence_alpha: 40.0,
        persistence_beta: 1.0,
        boredom_alpha: 1.0,
        boredom_beta: 39.0,
        slope: 6.0,
        population_size: 20_000,
        ..PopulationParams::default()
    }
}

/// Policy-only sweep on a stream of its own, apart from any feature runs.
pub fn oracle_sweep(
    levels: &[LevelConfig],
    weights: &PolicyStore,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<LevelRuns>> {
    let agent = AgentSpec::new(AgentKind::PolicyOnly);
    let records = collect_runs(levels, &agent, Some(weights), n_runs, derive_seed(&[salt::ORACLE, seed]))?;
    Ok(levels
        .iter()
        .zip(records.chunks(n_runs))
        .map(|(level, runs)| LevelRuns {
            level_id: level.level_id,
            budget: agent.move_budget(level),
            records: runs.to_vec(),
        })
        .collect())
}

/// `pass_weight * mean pass + moves_weight * best-run moves-left ratio`.
pub fn oracle_capability(level: &LevelRuns, blend: &OracleBlend) -> Result<f64> {
    let pass: Vec<f64> = level.records.iter().map(|r| f64::from(u8::from(r.passed))).collect();
    let best = best_run_subset(&level.records, blend.top_fraction, RankKey::MovesLeft)?;
    let ratios: Vec<f64> = best
        .iter()
        .map(|r| f64::from(r.moves_left) / f64::from(level.budget))
        .collect();
    Ok(blend.pass_weight * mean(&pass) + blend.moves_weight * mean(&ratios))
}

/// "Human" pass and churn rates: oracle capabilities become difficulties
/// (least capable level = 1, most = 0), which drive a simulated population.
pub fn generate_synthetic_truth(
    oracle: &[LevelRuns],
    params: &PopulationParams,
    blend: &OracleBlend,
    seed: u64,
) -> Result<Vec<GroundTruthRecord>> {
    if oracle.is_empty() {
        return Err(Error::contract("no oracle levels"));
    }
    let capability = oracle
        .iter()
        .map(|l| oracle_capability(l, blend))
        .collect::<Result<Vec<f64>>>()?;
    let difficulty = normalize_difficulty(&capability);
    let out = simulate_population(&difficulty, params, derive_seed(&[salt::TRUTH, seed]))?;
    Ok(oracle
        .iter()
        .zip(out.levels)
        .map(|(l, p)| GroundTruthRecord {
            level_id: l.level_id,
            pass_rate: p.pass_rate,
            churn_rate: p.churn_rate,
        })
        .collect())
}
