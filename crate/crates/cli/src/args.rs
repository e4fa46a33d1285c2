use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use playtest_core::eval::AgentTag;
use playtest_core::mcts::{AgentKind, Dynamics};
use playtest_core::stats::FeatureSet;

/// AI playtesting pipeline: train rollout policies, play levels with search
/// agents, extract features, generate synthetic player truth and evaluate
/// pass-rate and churn predictors.
///
/// Exit codes: 0 success, 1 usage or invalid configuration, 2 I/O failure,
/// 3 input file violates its schema, 4 trained weights missing, 5 data
/// error (too few levels, undefined correlation, inconsistent inputs).
#[derive(Debug, Parser)]
#[command(name = "playtest", version)]
pub struct Cli {
    /// Worker threads. Outputs do not depend on this value.
    #[arg(long, global = true, default_value_t = 16)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Train a softmax rollout policy per level with the cross-entropy method.
    Train(TrainArgs),
    /// Play every level with one agent and write the runs CSV.
    RunAgent(RunAgentArgs),
    /// Turn runs CSVs into feature tables, one file per agent and feature set.
    Features(FeaturesArgs),
    /// Spearman correlation of best-run feature averages with truth pass rates.
    Sweep(SweepArgs),
    /// Synthetic "human" pass and churn rates from an oracle agent sweep.
    SynthTruth(SynthTruthArgs),
    /// Cross-validate baseline and extended predictors.
    Predict(PredictArgs),
    /// Render a sweep CSV or a truth CSV as SVG.
    Plot(PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::RunAgent(_) => "run-agent",
            Command::Features(_) => "features",
            Command::Sweep(_) => "sweep",
            Command::SynthTruth(_) => "synth-truth",
            Command::Predict(_) => "predict",
            Command::Plot(_) => "plot",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LevelArgs {
    /// Level pack (TOML, one [[level]] table per level).
    #[arg(long)]
    pub levels: PathBuf,

    /// Restrict to these level ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub level_ids: Option<Vec<u32>>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,

    /// Cross-entropy iterations per level.
    #[arg(long, default_value_t = 30)]
    pub iterations: usize,

    /// Candidate weight vectors per iteration.
    #[arg(long, default_value_t = 32)]
    pub population: usize,

    /// Episodes each candidate is scored on.
    #[arg(long, default_value_t = 16)]
    pub episodes: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output weights file (TOML).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentArg {
    Vanilla,
    Policy,
    Myopic,
    PolicyMyopic,
    PolicyOnly,
}

impl From<AgentArg> for AgentKind {
    fn from(a: AgentArg) -> Self {
        match a {
            AgentArg::Vanilla => AgentKind::Vanilla,
            AgentArg::Policy => AgentKind::Policy,
            AgentArg::Myopic => AgentKind::Myopic,
            AgentArg::PolicyMyopic => AgentKind::PolicyMyopic,
            AgentArg::PolicyOnly => AgentKind::PolicyOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsArg {
    /// Refills after a committed move are hidden from the agent.
    Hidden,
    /// The committed move lands exactly where the search predicted.
    Deterministic,
}

impl From<DynamicsArg> for Dynamics {
    fn from(d: DynamicsArg) -> Self {
        match d {
            DynamicsArg::Hidden => Dynamics::HiddenRefill,
            DynamicsArg::Deterministic => Dynamics::Deterministic,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RunAgentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,

    #[arg(long, value_enum)]
    pub agent: AgentArg,

    /// Trained weights; required by every agent with a learned rollout policy.
    #[arg(long)]
    pub weights: Option<PathBuf>,

    /// Search iterations per move.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,

    /// Maximum moves per rollout.
    #[arg(long, default_value_t = 10)]
    pub rollout_cap: usize,

    /// Discount in rollouts and backpropagation [default: 0.9 for myopic
    /// variants, 1 otherwise].
    #[arg(long)]
    pub gamma: Option<f64>,

    /// UCT exploration constant.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub c: f64,

    /// Runs per level [default: 20 for search agents, 1000 for policy-only].
    #[arg(long)]
    pub runs: Option<usize>,

    #[arg(long, value_enum, default_value_t = DynamicsArg::Hidden)]
    pub dynamics: DynamicsArg,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output runs CSV.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_set(s: &str) -> Result<FeatureSet, playtest_core::Error> {
    s.parse()
}

fn parse_agent_tag(s: &str) -> Result<AgentTag, playtest_core::Error> {
    s.parse()
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,

    /// Runs of the policy-only agent.
    #[arg(long, required_unless_present = "mcts_runs")]
    pub drl_runs: Option<PathBuf>,

    /// Runs of a search agent. Its F3P takes the pass rate from these runs
    /// and the best-run averages from --drl-runs when given.
    #[arg(long)]
    pub mcts_runs: Option<PathBuf>,

    /// Feature sets to extract.
    #[arg(long, value_delimiter = ',', value_parser = parse_set, default_value = "f16,f3,f3p")]
    #[serde(serialize_with = "tags")]
    pub set: Vec<FeatureSet>,

    /// Best-run fraction for the F3P moves-left average.
    #[arg(long, default_value_t = 0.15)]
    pub top_moves: f64,

    /// Best-run fraction for the F3P cleared-goals average.
    #[arg(long, default_value_t = 0.05)]
    pub top_goals: f64,

    /// Output directory; files are named <agent>_<set>.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,

    /// Runs CSV to correlate.
    #[arg(long)]
    pub runs: PathBuf,

    /// Truth CSV.
    #[arg(long)]
    pub truth: PathBuf,

    /// Best-run fractions.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.4,0.5,0.75,1.0"
    )]
    pub fractions: Vec<f64>,

    /// Output sweep CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthTruthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,

    /// Trained weights for the policy-only oracle.
    #[arg(long)]
    pub weights: PathBuf,

    /// Oracle runs per level.
    #[arg(long, default_value_t = 1000)]
    pub oracle_runs: usize,

    /// Weight of the oracle's mean pass rate in its capability score.
    #[arg(long, default_value_t = 0.5)]
    pub pass_weight: f64,

    /// Weight of the oracle's best-run moves-left ratio.
    #[arg(long, default_value_t = 0.5)]
    pub moves_weight: f64,

    /// Best-run fraction for the moves-left term.
    #[arg(long, default_value_t = 0.15)]
    pub top_fraction: f64,

    /// Simulated players.
    #[arg(long, default_value_t = 20_000)]
    pub population: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output truth CSV.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the oracle's runs CSV here.
    #[arg(long)]
    pub oracle_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Baseline,
    Extended,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Truth CSV.
    #[arg(long)]
    pub truth: PathBuf,

    /// Directory holding <agent>_<set>.csv feature tables.
    #[arg(long)]
    pub features_dir: PathBuf,

    /// Agents to evaluate (drl, mcts).
    #[arg(long, value_delimiter = ',', value_parser = parse_agent_tag, default_value = "drl,mcts")]
    #[serde(serialize_with = "tags")]
    pub agents: Vec<AgentTag>,

    /// Feature sets to evaluate.
    #[arg(long, value_delimiter = ',', value_parser = parse_set, default_value = "f16,f3,f3p")]
    #[serde(serialize_with = "tags")]
    pub set: Vec<FeatureSet>,

    #[arg(long, value_enum, default_value_t = ModelArg::Both)]
    pub model: ModelArg,

    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Extended-predictor repetitions per fold.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,

    /// Multiplier on the churn error in the population-fit objective.
    #[arg(long, default_value_t = 1.0)]
    pub churn_weight: f64,

    /// Cross-entropy iterations of the population fit.
    #[arg(long, default_value_t = 20)]
    pub fit_iterations: usize,

    /// Candidates per population-fit iteration.
    #[arg(long, default_value_t = 64)]
    pub fit_candidates: usize,

    /// Players simulated per population-fit candidate.
    #[arg(long, default_value_t = 2000)]
    pub fit_population: usize,

    /// Players simulated when predicting held-out levels.
    #[arg(long, default_value_t = 10_000)]
    pub predict_population: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output report CSV.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write held-out predictions here.
    #[arg(long)]
    pub predictions: Option<PathBuf>,

    /// Also refit every configuration on all levels and save one TOML each.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Input: sweep CSV. Correlation against best-run fraction.
    Sweep,
    /// Input: truth CSV. Pass rate against churn rate, coloured by level order.
    Scatter,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,

    #[arg(long)]
    pub input: PathBuf,

    /// Output SVG.
    #[arg(long)]
    pub out: PathBuf,
}

fn tags<T: std::fmt::Display, S: serde::Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(|v| v.to_string()))
}
