use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kfold_split, mse, GroundTruthRecord};
use crate::error::{Error, Result};
use crate::predict::{
    fit_linear, fit_population, predict_linear, simulate_population, DifficultyScale, FitConfig, LinearModel,
    PopulationParams, RateTruth, DEFAULT_POPULATION,
};
use crate::seed::{derive_seed, salt};
use crate::stats::describe::{mean, std_dev};
use crate::stats::{FeatureSet, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predictor {
    Baseline,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentTag {
    Drl,
    Mcts,
}

macro_rules! tagged {
    ($ty:ty, $($variant:path => $tag:literal),+) => {
        impl $ty {
            pub fn tag(self) -> &'static str {
                match self { $($variant => $tag),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.tag())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                $(if s.eq_ignore_ascii_case($tag) { return Ok($variant); })+
                Err(Error::config(format!("unknown {} '{s}'", stringify!($ty))))
            }
        }
    };
}

tagged!(Predictor, Predictor::Baseline => "baseline", Predictor::Extended => "extended");
tagged!(AgentTag, AgentTag::Drl => "drl", AgentTag::Mcts => "mcts");

/// One row of the predictor × agent × feature-set grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfigTag {
    pub predictor: Predictor,
    pub agent: AgentTag,
    pub features: FeatureSet,
}

impl ConfigTag {
    pub fn grid() -> Vec<ConfigTag> {
        let mut out = Vec::with_capacity(12);
        for predictor in [Predictor::Baseline, Predictor::Extended] {
            for agent in [AgentTag::Drl, AgentTag::Mcts] {
                for features in FeatureSet::ALL {
                    out.push(ConfigTag { predictor, agent, features });
                }
            }
        }
        out
    }
}

impl fmt::Display for ConfigTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cap = |s: &str| s[..1].to_uppercase() + &s[1..];
        write!(
            f,
            "{}-{}-{}",
            cap(self.predictor.tag()),
            self.agent.tag().to_uppercase(),
            self.features.tag()
        )
    }
}

impl FromStr for ConfigTag {
    type Err = Error;

    /// Parses `Predictor-AGENT-SET`, e.g. `Extended-MCTS-F3P`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        let [p, a, f] = parts.as_slice() else {
            return Err(Error::config(format!("configuration '{s}' is not predictor-agent-features")));
        };
        Ok(ConfigTag {
            predictor: p.parse()?,
            agent: a.parse()?,
            features: f.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    /// Repetitions of the extended predictor per fold, with distinct seeds.
    pub extended_seeds: usize,
    pub seed: u64,
    pub fit: FitConfig,
    /// Players simulated when predicting held-out levels.
    pub predict_population: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 5,
            extended_seeds: 5,
            seed: 0,
            fit: FitConfig::default(),
            predict_population: DEFAULT_POPULATION,
        }
    }
}

/// Sees the level ids handed to every fitting call; used to prove that
/// held-out levels never reach a fit.
pub trait FitObserver: Sync {
    fn fitted_on(&self, fold: usize, level_ids: &[u32]);
}

pub struct NoObserver;

impl FitObserver for NoObserver {
    fn fitted_on(&self, _: usize, _: &[u32]) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldOutPrediction {
    pub level_id: u32,
    pub pass_pred: f64,
    pub churn_pred: f64,
    pub pass_true: f64,
    pub churn_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub config: ConfigTag,
    pub pass_mse_mean: f64,
    pub pass_mse_std: f64,
    pub churn_mse_mean: f64,
    pub churn_mse_std: f64,
    pub pass_folds: Vec<f64>,
    pub churn_folds: Vec<f64>,
    /// Each level's prediction from the fold that held it out.
    pub predictions: Vec<HeldOutPrediction>,
}

struct FoldResult {
    pass_mse: f64,
    churn_mse: f64,
    predictions: Vec<HeldOutPrediction>,
}

fn fold_of(level: u32, folds: &[Vec<u32>]) -> usize {
    folds.iter().position(|f| f.contains(&level)).expect("every level is in a fold")
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    config: &ConfigTag,
    fold: usize,
    test: &[usize],
    train: &[usize],
    features: &[FeatureVector],
    truth: &[GroundTruthRecord],
    eval: &EvalConfig,
    observer: &dyn FitObserver,
) -> Result<FoldResult> {
    let names: Vec<String> = config.features.names().iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> = train.iter().map(|&i| features[i].as_slice()).collect();
    let pass: Vec<f64> = train.iter().map(|&i| truth[i].pass_rate).collect();
    let churn: Vec<f64> = train.iter().map(|&i| truth[i].churn_rate).collect();
    let train_ids: Vec<u32> = train.iter().map(|&i| truth[i].level_id).collect();
    observer.fitted_on(fold, &train_ids);
    let model: LinearModel<f64> = fit_linear(&names, &rows, &pass, &churn)?;
    let linear = |i: usize| predict_linear(&model, truth[i].level_id, &names, &features[i].as_slice());

    // (pass, churn) per held-out level, averaged over repetitions
    let mut held: Vec<(f64, f64)> = vec![(0.0, 0.0); test.len()];
    let mut pass_errors = Vec::new();
    let mut churn_errors = Vec::new();
    match config.predictor {
        Predictor::Baseline => {
            for (slot, &i) in held.iter_mut().zip(test) {
                let p = linear(i)?;
                *slot = (p.pass_rate, p.churn_rate);
            }
        }
        Predictor::Extended => {
            let all_pass = (0..truth.len())
                .map(|i| linear(i).map(|p| p.pass_rate))
                .collect::<Result<Vec<f64>>>()?;
            let scale = DifficultyScale::from_predictions(&train.iter().map(|&i| all_pass[i]).collect::<Vec<_>>());
            let difficulty: Vec<f64> = all_pass.iter().map(|&p| scale.apply(p)).collect();
            let mut mask: Vec<Option<RateTruth>> = vec![None; truth.len()];
            for &i in train {
                mask[i] = Some(RateTruth {
                    pass_rate: truth[i].pass_rate,
                    churn_rate: truth[i].churn_rate,
                });
            }
            let repeats = eval.extended_seeds.max(1);
            for rep in 0..repeats {
                observer.fitted_on(fold, &train_ids);
                let fit_seed = derive_seed(&[salt::FIT, eval.seed, fold as u64, rep as u64]);
                let params = fit_population(&difficulty, &mask, &eval.fit, fit_seed)?;
                let params = PopulationParams {
                    population_size: eval.predict_population,
                    ..params
                };
                let sim = simulate_population(&difficulty, &params, derive_seed(&[fit_seed, 1]))?;
                let preds: Vec<(f64, f64)> = test
                    .iter()
                    .map(|&i| (sim.levels[i].pass_rate, sim.levels[i].churn_rate))
                    .collect();
                let (pe, ce) = errors(&preds, test, truth)?;
                pass_errors.push(pe);
                churn_errors.push(ce);
                for (slot, p) in held.iter_mut().zip(&preds) {
                    slot.0 += p.0 / repeats as f64;
                    slot.1 += p.1 / repeats as f64;
                }
            }
        }
    }
    let (pass_mse, churn_mse) = if pass_errors.is_empty() {
        errors(&held, test, truth)?
    } else {
        (mean(&pass_errors), mean(&churn_errors))
    };
    Ok(FoldResult {
        pass_mse,
        churn_mse,
        predictions: test
            .iter()
            .zip(&held)
            .map(|(&i, &(p, c))| HeldOutPrediction {
                level_id: truth[i].level_id,
                pass_pred: p,
                churn_pred: c,
                pass_true: truth[i].pass_rate,
                churn_true: truth[i].churn_rate,
            })
            .collect(),
    })
}

fn errors(preds: &[(f64, f64)], test: &[usize], truth: &[GroundTruthRecord]) -> Result<(f64, f64)> {
    let ids = |f: fn(&GroundTruthRecord) -> f64| -> Vec<(u32, f64)> {
        test.iter().map(|&i| (truth[i].level_id, f(&truth[i]))).collect()
    };
    let pass_pred: Vec<(u32, f64)> = test.iter().zip(preds).map(|(&i, p)| (truth[i].level_id, p.0)).collect();
    let churn_pred: Vec<(u32, f64)> = test.iter().zip(preds).map(|(&i, p)| (truth[i].level_id, p.1)).collect();
    Ok((
        mse(&pass_pred, &ids(|t| t.pass_rate))?,
        mse(&churn_pred, &ids(|t| t.churn_rate))?,
    ))
}

/// k-fold cross-validation of one configuration. `features` and `truth`
/// list the same levels in play order.
pub fn evaluate_config(
    config: ConfigTag,
    features: &[FeatureVector],
    truth: &[GroundTruthRecord],
    eval: &EvalConfig,
    observer: &dyn FitObserver,
) -> Result<SummaryReport> {
    if features.len() != truth.len() || features.iter().zip(truth).any(|(f, t)| f.level_id != t.level_id) {
        return Err(Error::contract("features and truth must list the same levels in the same order"));
    }
    if features.iter().any(|f| f.feature_set != config.features) {
        return Err(Error::contract(format!("features are not all {}", config.features)));
    }
    let ids: Vec<u32> = truth.iter().map(|t| t.level_id).collect();
    let folds = kfold_split(&ids, eval.folds, eval.seed)?;
    let results = (0..folds.len())
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ids.len()).partition(|&i| fold_of(ids[i], &folds) == f);
            run_fold(&config, f, &test, &train, features, truth, eval, observer)
                .map_err(|e| e.context(&format!("{config} fold {}", f + 1)))
        })
        .collect::<Result<Vec<FoldResult>>>()?;
    let pass_folds: Vec<f64> = results.iter().map(|r| r.pass_mse).collect();
    let churn_folds: Vec<f64> = results.iter().map(|r| r.churn_mse).collect();
    let mut predictions: Vec<HeldOutPrediction> = results.into_iter().flat_map(|r| r.predictions).collect();
    predictions.sort_by_key(|p| ids.iter().position(|&id| id == p.level_id));
    Ok(SummaryReport {
        config,
        pass_mse_mean: mean(&pass_folds),
        pass_mse_std: std_dev(&pass_folds),
        churn_mse_mean: mean(&churn_folds),
        churn_mse_std: std_dev(&churn_folds),
        pass_folds,
        churn_folds,
        predictions,
    })
}

/// Evaluates every configuration whose features are supplied by `features_for`.
pub fn run_grid<F>(
    configs: &[ConfigTag],
    features_for: F,
    truth: &[GroundTruthRecord],
    eval: &EvalConfig,
) -> Result<Vec<SummaryReport>>
where
    F: Fn(AgentTag, FeatureSet) -> Result<Vec<FeatureVector>> + Sync,
{
    configs
        .par_iter()
        .map(|c| evaluate_config(*c, &features_for(c.agent, c.features)?, truth, eval, &NoObserver))
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Report CSV: one row per configuration; per-fold errors are `;`-joined.
pub fn write_report<W: Write>(mut out: W, header: Option<&str>, reports: &[SummaryReport]) -> Result<()> {
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.config.to_string(),
            r.config.predictor.tag().to_string(),
            r.config.agent.tag().to_string(),
            r.config.features.tag().to_string(),
            r.pass_mse_mean.to_string(),
            r.pass_mse_std.to_string(),
            r.churn_mse_mean.to_string(),
            r.churn_mse_std.to_string(),
            join(&r.pass_folds),
            join(&r.churn_folds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Held-out predictions CSV: `config,level_id,pass_pred,churn_pred,pass_true,churn_true`.
pub fn write_predictions<W: Write>(mut out: W, header: Option<&str>, reports: &[SummaryReport]) -> Result<()> {
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["config", "level_id", "pass_pred", "churn_pred", "pass_true", "churn_true"])?;
    for r in reports {
        for p in &r.predictions {
            w.write_record([
                r.config.to_string(),
                p.level_id.to_string(),
                p.pass_pred.to_string(),
                p.churn_pred.to_string(),
                p.pass_true.to_string(),
                p.churn_true.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

const REPORT_HEADER: [&str; 10] = [
    "config",
    "predictor",
    "agent",
    "features",
    "pass_mse_mean",
    "pass_mse_std",
    "churn_mse_mean",
    "churn_mse_std",
    "pass_mse_folds",
    "churn_mse_folds",
];

fn parse_f64(field: &str, name: &str) -> std::result::Result<f64, String> {
    field.parse().map_err(|e| format!("{name}: {e}"))
}

fn parse_folds(field: &str, name: &str) -> std::result::Result<Vec<f64>, String> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field.split(';').map(|v| parse_f64(v, name)).collect()
}

/// Reads a report CSV back. Held-out predictions live in their own file,
/// so every returned report has an empty `predictions` list.
pub fn read_report<R: Read>(input: R, origin: &str) -> Result<Vec<SummaryReport>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    if reader.headers()?.iter().ne(REPORT_HEADER) {
        return Err(Error::schema(origin, format!("expected header {}", REPORT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = (|| -> std::result::Result<SummaryReport, String> {
            let config: ConfigTag = rec[0].parse().map_err(|e: Error| e.to_string())?;
            let split = [config.predictor.tag(), config.agent.tag(), config.features.tag()];
            if split.iter().zip(&rec.iter().collect::<Vec<_>>()[1..4]).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
                return Err(format!("columns 2-4 disagree with config '{}'", &rec[0]));
            }
            Ok(SummaryReport {
                config,
                pass_mse_mean: parse_f64(&rec[4], "pass_mse_mean")?,
                pass_mse_std: parse_f64(&rec[5], "pass_mse_std")?,
                churn_mse_mean: parse_f64(&rec[6], "churn_mse_mean")?,
                churn_mse_std: parse_f64(&rec[7], "churn_mse_std")?,
                pass_folds: parse_folds(&rec[8], "pass_mse_folds")?,
                churn_folds: parse_folds(&rec[9], "churn_mse_folds")?,
                predictions: Vec::new(),
            })
        })()
        .map_err(|m| Error::schema(origin, format!("row {}: {m}", i + 1)))?;
        out.push(row);
    }
    Ok(out)
}

pub fn read_predictions<R: Read>(input: R, origin: &str) -> Result<Vec<(ConfigTag, HeldOutPrediction)>> {
    let header = ["config", "level_id", "pass_pred", "churn_pred", "pass_true", "churn_true"];
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    if reader.headers()?.iter().ne(header) {
        return Err(Error::schema(origin, format!("expected header {}", header.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = (|| -> std::result::Result<(ConfigTag, HeldOutPrediction), String> {
            let config: ConfigTag = rec[0].parse().map_err(|e: Error| e.to_string())?;
            let level_id: u32 = rec[1].parse().map_err(|e| format!("level_id: {e}"))?;
            Ok((
                config,
                HeldOutPrediction {
                    level_id,
                    pass_pred: parse_f64(&rec[2], "pass_pred")?,
                    churn_pred: parse_f64(&rec[3], "churn_pred")?,
                    pass_true: parse_f64(&rec[4], "pass_true")?,
                    churn_true: parse_f64(&rec[5], "churn_true")?,
                },
            ))
        })()
        .map_err(|m| Error::schema(origin, format!("row {}: {m}", i + 1)))?;
        out.push(row);
    }
    Ok(out)
}

/// A configuration refitted on every level with truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedPredictor {
    pub config: String,
    pub linear: LinearModel<f64>,
    /// Present for the extended predictor only.
    pub difficulty: Option<DifficultyScale<f64>>,
    pub population: Option<PopulationParams>,
}

impl FittedPredictor {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fitted predictor serialises")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))
    }
}

pub fn fit_final(
    config: ConfigTag,
    features: &[FeatureVector],
    truth: &[GroundTruthRecord],
    eval: &EvalConfig,
) -> Result<FittedPredictor> {
    if features.len() != truth.len() || features.iter().zip(truth).any(|(f, t)| f.level_id != t.level_id) {
        return Err(Error::contract("features and truth must list the same levels in the same order"));
    }
    let names: Vec<String> = config.features.names().iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> = features.iter().map(FeatureVector::as_slice).collect();
    let pass: Vec<f64> = truth.iter().map(|t| t.pass_rate).collect();
    let churn: Vec<f64> = truth.iter().map(|t| t.churn_rate).collect();
    let linear: LinearModel<f64> = fit_linear(&names, &rows, &pass, &churn)?;
    let (difficulty, population) = match config.predictor {
        Predictor::Baseline => (None, None),
        Predictor::Extended => {
            let predicted = features
                .iter()
                .map(|f| predict_linear(&linear, f.level_id, &names, &f.as_slice()).map(|p| p.pass_rate))
                .collect::<Result<Vec<f64>>>()?;
            let scale = DifficultyScale::from_predictions(&predicted);
            let d: Vec<f64> = predicted.iter().map(|&p| scale.apply(p)).collect();
            let mask: Vec<Option<RateTruth>> = truth
                .iter()
                .map(|t| Some(RateTruth { pass_rate: t.pass_rate, churn_rate: t.churn_rate }))
                .collect();
            let params = fit_population(&d, &mask, &eval.fit, derive_seed(&[salt::FIT, eval.seed, u64::MAX]))?;
            (Some(scale), Some(PopulationParams { population_size: eval.predict_population, ..params }))
        }
    };
    Ok(FittedPredictor {
        config: config.to_string(),
        linear,
        difficulty,
        population,
    })
}
