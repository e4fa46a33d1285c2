use super::describe::mean;
use super::features::F3_NAMES;
use super::spearman::spearman;
use super::subset::{best_run_subset, RankKey};
use super::RunRecord;
use crate::error::{Error, Result};

/// One level's runs together with the agent's move budget on it.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRuns {
    pub level_id: u32,
    pub budget: u32,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub fraction: f64,
    pub feature: &'static str,
    /// `None` when the correlation is undefined for this cell.
    pub rho: Option<f64>,
}

pub const DEFAULT_FRACTIONS: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0];

fn key_for(feature: &str) -> RankKey {
    if feature == "cleared_goals" {
        RankKey::GoalsCleared
    } else {
        RankKey::MovesLeft
    }
}

/// Best-run average of one F3 feature on one level.
pub fn best_run_average(level: &LevelRuns, feature: &str, fraction: f64) -> Result<f64> {
    let subset = best_run_subset(&level.records, fraction, key_for(feature))?;
    let values: Vec<f64> = match feature {
        "pass_rate" => subset.iter().map(|r| if r.passed { 1.0 } else { 0.0 }).collect(),
        "moves_left_ratio" => subset
            .iter()
            .map(|r| r.moves_left as f64 / level.budget as f64)
            .collect(),
        "cleared_goals" => subset.iter().map(|r| r.goals_cleared_fraction).collect(),
        other => return Err(Error::contract(format!("unknown sweep feature '{other}'"))),
    };
    Ok(mean(&values))
}

/// Spearman correlation between truth pass rates and best-run averages of
/// each F3 feature, for every fraction. Undefined cells are kept as `None`.
pub fn correlation_sweep(levels: &[LevelRuns], truth_pass: &[f64], fractions: &[f64]) -> Result<Vec<SweepCell>> {
    if levels.len() != truth_pass.len() {
        return Err(Error::contract("one truth pass rate per level is required"));
    }
    if levels.len() < 3 {
        return Err(Error::contract("the sweep needs at least three levels"));
    }
    let mut cells = Vec::with_capacity(fractions.len() * F3_NAMES.len());
    for &fraction in fractions {
        for feature in F3_NAMES {
            let xs = levels
                .iter()
                .map(|l| best_run_average(l, feature, fraction))
                .collect::<Result<Vec<f64>>>()?;
            let rho = match spearman(&xs, truth_pass) {
                Ok(r) => Some(r),
                Err(Error::UndefinedCorrelation(_)) => None,
                Err(e) => return Err(e),
            };
            cells.push(SweepCell { fraction, feature, rho });
        }
    }
    Ok(cells)
}
