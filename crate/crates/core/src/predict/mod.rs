//! Pass and churn rate predictors: a linear baseline and a simulated player
//! population driven by normalised difficulty.

mod difficulty;
mod fit;
mod linear;
mod population;

use serde::{Deserialize, Serialize};

pub use difficulty::{normalize_difficulty, DifficultyScale};
pub use fit::{fit_population, population_objective, FitConfig, RateTruth};
pub use linear::{fit_linear, predict_linear, AffineTarget, LinearModel, RIDGE_FALLBACK};
pub use population::{
    simulate_population, PopulationOutcome, PopulationParams, DEFAULT_MAX_ATTEMPTS, DEFAULT_POPULATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPrediction<R> {
    pub level_id: u32,
    pub pass_rate: R,
    pub churn_rate: R,
}
