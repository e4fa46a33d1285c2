use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::describe::{max, mean, min, percentile, std_dev};
use super::subset::{best_run_subset, RankKey};
use super::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    F16,
    F3,
    F3P,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::F16, FeatureSet::F3, FeatureSet::F3P];

    pub fn tag(self) -> &'static str {
        match self {
            FeatureSet::F16 => "F16",
            FeatureSet::F3 => "F3",
            FeatureSet::F3P => "F3P",
        }
    }

    pub fn names(self) -> &'static [&'static str] {
        match self {
            FeatureSet::F16 => &F16_NAMES,
            FeatureSet::F3 | FeatureSet::F3P => &F3_NAMES,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown feature set '{s}'")))
    }
}

pub const F3_NAMES: [&str; 3] = ["pass_rate", "moves_left_ratio", "cleared_goals"];

/// The "F16" set: two pass statistics plus nine statistics of each of
/// cleared goals and moves-left ratio, 20 values in all.
pub const F16_NAMES: [&str; 20] = [
    "pass_mean",
    "pass_std",
    "cleared_goals_mean",
    "cleared_goals_std",
    "cleared_goals_min",
    "cleared_goals_max",
    "cleared_goals_p5",
    "cleared_goals_p10",
    "cleared_goals_p25",
    "cleared_goals_p50",
    "cleared_goals_p75",
    "moves_left_ratio_mean",
    "moves_left_ratio_std",
    "moves_left_ratio_min",
    "moves_left_ratio_max",
    "moves_left_ratio_p5",
    "moves_left_ratio_p10",
    "moves_left_ratio_p25",
    "moves_left_ratio_p50",
    "moves_left_ratio_p75",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    pub top_moves_fraction: f64,
    pub top_goals_fraction: f64,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            top_moves_fraction: 0.15,
            top_goals_fraction: 0.05,
        }
    }
}

/// Named feature values for one level, in the set's canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub level_id: u32,
    pub feature_set: FeatureSet,
    pub values: Vec<(String, f64)>,
}

impl FeatureVector {
    fn from_values(level_id: u32, feature_set: FeatureSet, values: &[f64]) -> Result<Self> {
        let names = feature_set.names();
        debug_assert_eq!(names.len(), values.len());
        if let Some((n, v)) = names.iter().zip(values).find(|(_, v)| !v.is_finite()) {
            return Err(Error::contract(format!("feature {n} is not finite ({v})")));
        }
        Ok(FeatureVector {
            level_id,
            feature_set,
            values: names.iter().map(|n| n.to_string()).zip(values.iter().copied()).collect(),
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn as_slice(&self) -> Vec<f64> {
        self.values.iter().map(|&(_, v)| v).collect()
    }
}

fn pass(r: &RunRecord) -> f64 {
    if r.passed {
        1.0
    } else {
        0.0
    }
}

fn moves_ratio(r: &RunRecord, budget: u32) -> f64 {
    r.moves_left as f64 / budget as f64
}

fn check(records: &[RunRecord], budget: u32) -> Result<u32> {
    let first = records
        .first()
        .ok_or_else(|| Error::contract("no run records for the level"))?;
    if budget == 0 {
        return Err(Error::contract("agent move budget must be positive"));
    }
    if records.iter().any(|r| r.level_id != first.level_id) {
        return Err(Error::contract("records from more than one level"));
    }
    if let Some(r) = records.iter().find(|r| r.moves_left > budget) {
        return Err(Error::contract(format!(
            "moves_left {} exceeds the agent budget {budget}",
            r.moves_left
        )));
    }
    Ok(first.level_id)
}

/// Mean pass, moves-left ratio and cleared goals over all runs.
fn f3_values(records: &[RunRecord], budget: u32) -> [f64; 3] {
    let passes: Vec<f64> = records.iter().map(pass).collect();
    let ratios: Vec<f64> = records.iter().map(|r| moves_ratio(r, budget)).collect();
    let goals: Vec<f64> = records.iter().map(|r| r.goals_cleared_fraction).collect();
    [mean(&passes), mean(&ratios), mean(&goals)]
}

/// Moves-left ratio and cleared goals averaged over each one's best runs.
fn percentile_values(records: &[RunRecord], budget: u32, opts: &FeatureOptions) -> Result<[f64; 2]> {
    let top_moves = best_run_subset(records, opts.top_moves_fraction, RankKey::MovesLeft)?;
    let top_goals = best_run_subset(records, opts.top_goals_fraction, RankKey::GoalsCleared)?;
    let ratios: Vec<f64> = top_moves.iter().map(|r| moves_ratio(r, budget)).collect();
    let goals: Vec<f64> = top_goals.iter().map(|r| r.goals_cleared_fraction).collect();
    Ok([mean(&ratios), mean(&goals)])
}

fn nine_stats(values: &[f64], out: &mut Vec<f64>) {
    out.extend([mean(values), std_dev(values), min(values), max(values)]);
    out.extend([5.0, 10.0, 25.0, 50.0, 75.0].map(|q| percentile(values, q)));
}

/// Features of one level's runs; `budget` is the move budget the agent
/// played with, used to normalise moves left.
pub fn extract_features(
    records: &[RunRecord],
    set: FeatureSet,
    budget: u32,
    opts: &FeatureOptions,
) -> Result<FeatureVector> {
    let level_id = check(records, budget)?;
    match set {
        FeatureSet::F3 => FeatureVector::from_values(level_id, set, &f3_values(records, budget)),
        FeatureSet::F3P => {
            let [ratio, goals] = percentile_values(records, budget, opts)?;
            FeatureVector::from_values(level_id, set, &[f3_values(records, budget)[0], ratio, goals])
        }
        FeatureSet::F16 => {
            let passes: Vec<f64> = records.iter().map(pass).collect();
            let goals: Vec<f64> = records.iter().map(|r| r.goals_cleared_fraction).collect();
            let ratios: Vec<f64> = records.iter().map(|r| moves_ratio(r, budget)).collect();
            let mut values = vec![mean(&passes), std_dev(&passes)];
            nine_stats(&goals, &mut values);
            nine_stats(&ratios, &mut values);
            FeatureVector::from_values(level_id, set, &values)
        }
    }
}

/// F3P for a search agent with few runs per level: pass rate from the search
/// runs, the best-run averages from a large policy-only sample.
pub fn extract_combined_f3p(
    search_runs: &[RunRecord],
    search_budget: u32,
    policy_runs: &[RunRecord],
    policy_budget: u32,
    opts: &FeatureOptions,
) -> Result<FeatureVector> {
    let level_id = check(search_runs, search_budget)?;
    if check(policy_runs, policy_budget)? != level_id {
        return Err(Error::contract("search and policy runs are from different levels"));
    }
    let [ratio, goals] = percentile_values(policy_runs, policy_budget, opts)?;
    FeatureVector::from_values(
        level_id,
        FeatureSet::F3P,
        &[f3_values(search_runs, search_budget)[0], ratio, goals],
    )
}
