//! Run records, per-level features, best-run subsets and rank correlation.

mod collect;
pub mod describe;
mod features;
mod records;
mod spearman;
mod subset;
mod sweep;
mod tables;

pub use collect::{collect_runs, run_seed, DEFAULT_POLICY_RUNS, DEFAULT_SEARCH_RUNS};
pub use features::{
    extract_combined_f3p, extract_features, FeatureOptions, FeatureSet, FeatureVector, F16_NAMES, F3_NAMES,
};
pub use records::{read_runs, write_runs, RunRecord};
pub use spearman::{average_ranks, pearson, spearman};
pub use subset::{best_run_subset, subset_size, RankKey};
pub use sweep::{best_run_average, correlation_sweep, LevelRuns, SweepCell, DEFAULT_FRACTIONS};
pub use tables::{read_features, read_sweep, write_features, write_sweep};
