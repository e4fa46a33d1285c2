use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Maps predicted pass rates to difficulties: the easiest reference level
/// gets 0, the hardest 1. Built from one set of levels, applicable to others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultyScale<R> {
    pub min_pass: R,
    pub max_pass: R,
}

impl<R: Real> DifficultyScale<R> {
    pub fn from_predictions(pass: &[R]) -> Self {
        let min_pass = pass.iter().copied().fold(R::infinity(), R::min);
        let max_pass = pass.iter().copied().fold(R::neg_infinity(), R::max);
        DifficultyScale { min_pass, max_pass }
    }

    /// Clamped to `[0, 1]`; 0.5 everywhere when the scale is degenerate.
    pub fn apply(&self, pass: R) -> R {
        let span = self.max_pass - self.min_pass;
        if span.partial_cmp(&R::zero()) != Some(std::cmp::Ordering::Greater) {
            return R::of(0.5);
        }
        ((self.max_pass - pass) / span).max(R::zero()).min(R::one())
    }
}

pub fn normalize_difficulty<R: Real>(pass: &[R]) -> Vec<R> {
    if pass.len() < 2 {
        return vec![R::of(0.5); pass.len()];
    }
    let scale = DifficultyScale::from_predictions(pass);
    pass.iter().map(|&p| scale.apply(p)).collect()
}
