use std::cmp::Ordering;

use crate::error::{Error, Result};

use super::RunRecord;

/// Ordering used to pick a level's best runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankKey {
    #[default]
    MovesLeft,
    GoalsCleared,
}

impl RankKey {
    fn compare(self, a: &RunRecord, b: &RunRecord) -> Ordering {
        let by_key = match self {
            RankKey::MovesLeft => b.moves_left.cmp(&a.moves_left),
            RankKey::GoalsCleared => b.goals_cleared_fraction.total_cmp(&a.goals_cleared_fraction),
        };
        by_key.then(a.seed.cmp(&b.seed))
    }
}

/// `ceil(fraction * n)`, immune to products like `0.15 * 20 = 3.0000000000000004`.
pub fn subset_size(fraction: f64, n: usize) -> usize {
    let exact = fraction * n as f64;
    let nearest = exact.round();
    let k = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    (k as usize).clamp(1, n.max(1))
}

/// Top `ceil(fraction * n)` records by `key`, best first; ties go to the
/// lower seed.
pub fn best_run_subset(records: &[RunRecord], fraction: f64, key: RankKey) -> Result<Vec<&RunRecord>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::contract(format!("fraction {fraction} outside (0, 1]")));
    }
    if records.is_empty() {
        return Err(Error::contract("best_run_subset of an empty record list"));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| key.compare(a, b));
    sorted.truncate(subset_size(fraction, records.len()));
    Ok(sorted)
}
