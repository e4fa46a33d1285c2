//! Cross-validated evaluation of the predictors and the synthetic "human"
//! ground truth they are scored against.

mod cv;
mod synth;
mod truth;

use rand::seq::SliceRandom;

pub use cv::{
    evaluate_config, fit_final, read_predictions, read_report, run_grid, write_predictions, write_report, AgentTag, ConfigTag, EvalConfig, FitObserver,
    FittedPredictor, HeldOutPrediction, NoObserver, Predictor, SummaryReport,
};
pub use synth::{generate_synthetic_truth, oracle_capability, oracle_sweep, reference_truth_params, OracleBlend};
pub use truth::{read_truth, write_truth, GroundTruthRecord};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::{rng_from, salt};

/// Seeded shuffle, then `k` contiguous folds whose sizes differ by at most one.
pub fn kfold_split(level_ids: &[u32], k: usize, seed: u64) -> Result<Vec<Vec<u32>>> {
    if k == 0 || k > level_ids.len() {
        return Err(Error::contract(format!("{k} folds for {} levels", level_ids.len())));
    }
    let mut ids = level_ids.to_vec();
    ids.shuffle(&mut rng_from(&[salt::FOLDS, seed]));
    let (base, extra) = (ids.len() / k, ids.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(ids[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Mean squared error between predictions and truth keyed by level id; both
/// lists must name the same levels in the same order.
pub fn mse<R: Real>(predicted: &[(u32, R)], truth: &[(u32, R)]) -> Result<R> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::contract("predictions and truth differ in length or are empty"));
    }
    if predicted.iter().zip(truth).any(|(p, t)| p.0 != t.0) {
        return Err(Error::contract("predictions and truth name different levels"));
    }
    let sum = predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p.1 - t.1) * (p.1 - t.1))
        .sum::<R>();
    Ok(sum / R::of_usize(predicted.len()))
}
