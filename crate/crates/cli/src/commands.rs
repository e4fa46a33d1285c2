use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use playtest_core::env::{LevelConfig, LevelPack};
use playtest_core::eval::{
    fit_final, generate_synthetic_truth, oracle_sweep, read_truth, run_grid, write_predictions, write_report,
    write_truth, AgentTag, ConfigTag, EvalConfig, GroundTruthRecord, OracleBlend, Predictor,
};
use playtest_core::mcts::{AgentKind, AgentSpec};
use playtest_core::policy::{train_policy_with, PolicyStore, TrainConfig, TrainedPolicy};
use playtest_core::predict::{FitConfig, PopulationParams};
use playtest_core::stats::{
    collect_runs, correlation_sweep, extract_combined_f3p, extract_features, read_features, read_runs, read_sweep,
    write_features, write_runs, write_sweep, FeatureOptions, FeatureSet, FeatureVector, LevelRuns, RunRecord,
    DEFAULT_POLICY_RUNS, DEFAULT_SEARCH_RUNS,
};
use playtest_core::eval::reference_truth_params;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::plot;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

/// Writes through `body` into `path`, creating parent directories.
fn create<F>(path: &Path, body: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> playtest_core::Result<()>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn load_levels(args: &LevelArgs) -> CliResult<Vec<LevelConfig>> {
    let pack = LevelPack::parse(&read_text(&args.levels)?, &origin(&args.levels))?;
    let Some(ids) = &args.level_ids else {
        return Ok(pack.levels);
    };
    ids.iter()
        .map(|id| {
            pack.get(*id)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("level {id} is not in {}", origin(&args.levels))))
        })
        .collect()
}

fn load_weights(path: &Path) -> CliResult<PolicyStore> {
    Ok(PolicyStore::parse(&read_text(path)?, &origin(path))?)
}

fn load_runs(path: &Path) -> CliResult<Vec<RunRecord>> {
    Ok(read_runs(open(path)?, &origin(path))?)
}

fn load_truth(path: &Path) -> CliResult<Vec<GroundTruthRecord>> {
    Ok(read_truth(open(path)?, &origin(path))?)
}

fn fraction(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} {v} outside (0, 1]")))
    }
}

pub fn train(args: &TrainArgs, header: &str) -> CliResult<()> {
    let levels = load_levels(&args.levels)?;
    let config = TrainConfig {
        iterations: args.iterations,
        population: args.population,
        episodes: args.episodes,
        ..TrainConfig::default()
    };
    let policies = levels
        .par_iter()
        .map(|level| {
            train_policy_with(level, &config, args.seed).map(|w| TrainedPolicy::new(level.level_id, &w, args.seed))
        })
        .collect::<playtest_core::Result<Vec<_>>>()?;
    let store = PolicyStore { policies };
    create(&args.out, |out| {
        writeln!(out, "# {header}")?;
        out.write_all(store.to_toml().as_bytes())?;
        Ok(())
    })
}

pub fn run_agent(args: &RunAgentArgs, header: &str) -> CliResult<()> {
    let levels = load_levels(&args.levels)?;
    let kind = AgentKind::from(args.agent);
    let mut agent = AgentSpec::new(kind);
    agent.dynamics = args.dynamics.into();
    agent.config.budget = args.budget;
    agent.config.rollout_cap = args.rollout_cap;
    agent.config.c = args.c;
    if let Some(g) = args.gamma {
        agent.config.gamma = g;
    }
    let runs = args.runs.unwrap_or(if kind == AgentKind::PolicyOnly {
        DEFAULT_POLICY_RUNS
    } else {
        DEFAULT_SEARCH_RUNS
    });
    if runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let weights = match &args.weights {
        Some(p) => Some(load_weights(p)?),
        None => None,
    };
    let records = collect_runs(&levels, &agent, weights.as_ref(), runs, args.seed)?;
    create(&args.out, |out| write_runs(out, Some(header), &records))
}

/// Groups runs by level in pack order, with the budget the agent played with.
fn level_runs(levels: &[LevelConfig], records: Vec<RunRecord>, path: &Path) -> CliResult<Vec<LevelRuns>> {
    let mut by_level: BTreeMap<u32, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        by_level.entry(r.level_id).or_default().push(r);
    }
    if let Some(id) = by_level.keys().find(|id| !levels.iter().any(|l| l.level_id == **id)) {
        return Err(playtest_core::Error::Schema {
            path: origin(path),
            message: format!("level {id} is not in the level pack"),
        }
        .into());
    }
    let mut out = Vec::new();
    for level in levels {
        let Some(records) = by_level.remove(&level.level_id) else {
            continue;
        };
        let kind: AgentKind = records[0].agent.parse().map_err(|e: playtest_core::Error| {
            CliError::from(playtest_core::Error::Schema { path: origin(path), message: e.to_string() })
        })?;
        if records.iter().any(|r| r.agent != records[0].agent) {
            return Err(playtest_core::Error::Schema {
                path: origin(path),
                message: format!("level {} mixes agents", level.level_id),
            }
            .into());
        }
        out.push(LevelRuns {
            level_id: level.level_id,
            budget: AgentSpec::new(kind).move_budget(level),
            records,
        });
    }
    Ok(out)
}

pub fn feature_file(dir: &Path, agent: AgentTag, set: FeatureSet) -> PathBuf {
    dir.join(format!("{}_{}.csv", agent.tag(), set.tag().to_lowercase()))
}

pub fn features(args: &FeaturesArgs, header: &str) -> CliResult<()> {
    let levels = load_levels(&args.levels)?;
    let opts = FeatureOptions {
        top_moves_fraction: fraction("top-moves", args.top_moves)?,
        top_goals_fraction: fraction("top-goals", args.top_goals)?,
    };
    let drl = match &args.drl_runs {
        Some(p) => Some(level_runs(&levels, load_runs(p)?, p)?),
        None => None,
    };
    let mcts = match &args.mcts_runs {
        Some(p) => Some(level_runs(&levels, load_runs(p)?, p)?),
        None => None,
    };
    for &set in &args.set {
        if let Some(drl) = &drl {
            let rows = drl
                .iter()
                .map(|l| extract_features(&l.records, set, l.budget, &opts))
                .collect::<playtest_core::Result<Vec<FeatureVector>>>()?;
            create(&feature_file(&args.out_dir, AgentTag::Drl, set), |out| {
                write_features(out, Some(header), &rows)
            })?;
        }
        if let Some(mcts) = &mcts {
            let rows = mcts
                .iter()
                .map(|m| match (set, &drl) {
                    (FeatureSet::F3P, Some(drl)) => {
                        let d = drl.iter().find(|d| d.level_id == m.level_id).ok_or_else(|| {
                            playtest_core::Error::Contract(format!("no policy-only runs for level {}", m.level_id))
                        })?;
                        extract_combined_f3p(&m.records, m.budget, &d.records, d.budget, &opts)
                    }
                    _ => extract_features(&m.records, set, m.budget, &opts),
                })
                .collect::<playtest_core::Result<Vec<FeatureVector>>>()?;
            create(&feature_file(&args.out_dir, AgentTag::Mcts, set), |out| {
                write_features(out, Some(header), &rows)
            })?;
        }
    }
    Ok(())
}

/// Truth pass rates in the order of `levels`.
fn aligned_truth(levels: &[LevelRuns], truth: &[GroundTruthRecord]) -> CliResult<Vec<f64>> {
    levels
        .iter()
        .map(|l| {
            truth
                .iter()
                .find(|t| t.level_id == l.level_id)
                .map(|t| t.pass_rate)
                .ok_or_else(|| playtest_core::Error::Contract(format!("no truth for level {}", l.level_id)).into())
        })
        .collect()
}

pub fn sweep(args: &SweepArgs, header: &str) -> CliResult<()> {
    let levels = load_levels(&args.levels)?;
    for &f in &args.fractions {
        fraction("fractions", f)?;
    }
    let runs = level_runs(&levels, load_runs(&args.runs)?, &args.runs)?;
    let truth = aligned_truth(&runs, &load_truth(&args.truth)?)?;
    let cells = correlation_sweep(&runs, &truth, &args.fractions)?;
    create(&args.out, |out| write_sweep(out, Some(header), &cells))
}

pub fn synth_truth(args: &SynthTruthArgs, header: &str) -> CliResult<()> {
    let levels = load_levels(&args.levels)?;
    let weights = load_weights(&args.weights)?;
    if args.oracle_runs == 0 {
        return Err(CliError::Usage("--oracle-runs must be at least 1".into()));
    }
    let blend = OracleBlend {
        pass_weight: args.pass_weight,
        moves_weight: args.moves_weight,
        top_fraction: fraction("top-fraction", args.top_fraction)?,
    };
    let params = PopulationParams {
        population_size: args.population,
        ..reference_truth_params()
    };
    params.validate()?;
    let oracle = oracle_sweep(&levels, &weights, args.oracle_runs, args.seed)?;
    let truth = generate_synthetic_truth(&oracle, &params, &blend, args.seed)?;
    if let Some(path) = &args.oracle_out {
        let records: Vec<RunRecord> = oracle.iter().flat_map(|l| l.records.iter().cloned()).collect();
        create(path, |out| write_runs(out, Some(header), &records))?;
    }
    create(&args.out, |out| write_truth(out, Some(header), &truth))
}

pub fn predict(args: &PredictArgs, header: &str) -> CliResult<()> {
    let truth = load_truth(&args.truth)?;
    if args.folds < 2 {
        return Err(CliError::Usage("--folds must be at least 2".into()));
    }
    let predictors: &[Predictor] = match args.model {
        ModelArg::Baseline => &[Predictor::Baseline],
        ModelArg::Extended => &[Predictor::Extended],
        ModelArg::Both => &[Predictor::Baseline, Predictor::Extended],
    };
    let mut tables: BTreeMap<(u8, u8), Vec<FeatureVector>> = BTreeMap::new();
    let key = |a: AgentTag, s: FeatureSet| (a as u8, s as u8);
    for &agent in &args.agents {
        for &set in &args.set {
            let path = feature_file(&args.features_dir, agent, set);
            let rows = read_features(open(&path)?, &origin(&path))?;
            if rows.iter().any(|r| r.feature_set != set) {
                return Err(playtest_core::Error::Schema {
                    path: origin(&path),
                    message: format!("expected {set} features"),
                }
                .into());
            }
            let ordered = truth
                .iter()
                .map(|t| {
                    rows.iter().find(|r| r.level_id == t.level_id).cloned().ok_or_else(|| {
                        playtest_core::Error::Contract(format!("{} has no row for level {}", origin(&path), t.level_id))
                    })
                })
                .collect::<playtest_core::Result<Vec<_>>>()?;
            tables.insert(key(agent, set), ordered);
        }
    }
    let configs: Vec<ConfigTag> = predictors
        .iter()
        .flat_map(|&predictor| {
            args.agents.iter().flat_map(move |&agent| {
                args.set.iter().map(move |&features| ConfigTag { predictor, agent, features })
            })
        })
        .collect();
    let eval = EvalConfig {
        folds: args.folds,
        extended_seeds: args.seeds.max(1),
        seed: args.seed,
        fit: FitConfig {
            iterations: args.fit_iterations,
            candidates: args.fit_candidates,
            population_size: args.fit_population,
            churn_weight: args.churn_weight,
            ..FitConfig::default()
        },
        predict_population: args.predict_population,
    };
    let features_for = |a: AgentTag, s: FeatureSet| Ok(tables[&key(a, s)].clone());
    let reports = run_grid(&configs, features_for, &truth, &eval)?;
    create(&args.out, |out| write_report(out, Some(header), &reports))?;
    if let Some(path) = &args.predictions {
        create(path, |out| write_predictions(out, Some(header), &reports))?;
    }
    if let Some(dir) = &args.models_dir {
        let fitted = configs
            .par_iter()
            .map(|c| fit_final(*c, &tables[&key(c.agent, c.features)], &truth, &eval))
            .collect::<playtest_core::Result<Vec<_>>>()?;
        for model in fitted {
            create(&dir.join(format!("{}.toml", model.config)), |out| {
                writeln!(out, "# {header}")?;
                out.write_all(model.to_toml().as_bytes())?;
                Ok(())
            })?;
        }
    }
    Ok(())
}

pub fn plot(args: &PlotArgs, header: &str) -> CliResult<()> {
    let svg = match args.kind {
        PlotKind::Sweep => plot::sweep_svg(&read_sweep(open(&args.input)?, &origin(&args.input))?, header),
        PlotKind::Scatter => plot::scatter_svg(&load_truth(&args.input)?, header),
    };
    create(&args.out, |out| {
        out.write_all(svg.as_bytes())?;
        Ok(())
    })
}
