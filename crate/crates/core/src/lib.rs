pub mod cem;
pub mod env;
pub mod error;
pub mod eval;
pub mod mcts;
pub mod num;
pub mod policy;
pub mod predict;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use num::Real;

pub type LinearModel = predict::LinearModel<f64>;
pub type LinearModel32 = predict::LinearModel<f32>;
pub type LevelPrediction = predict::LevelPrediction<f64>;
pub type DifficultyScale = predict::DifficultyScale<f64>;
pub type ColorPopTree<'p> = mcts::SearchTree<'p, mcts::ColorPop, f64>;
pub type ColorPopTree32<'p> = mcts::SearchTree<'p, mcts::ColorPop, f32>;
