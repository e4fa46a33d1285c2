use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LevelPrediction;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::{rng_from, salt, StreamRng};

pub const DEFAULT_POPULATION: usize = 10_000;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 50;

/// Beta shapes of the three player traits, the logistic slope linking
/// skill and difficulty, and simulation size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationParams {
    pub skill_alpha: f64,
    pub skill_beta: f64,
    pub persistence_alpha: f64,
    pub persistence_beta: f64,
    pub boredom_alpha: f64,
    pub boredom_beta: f64,
    pub slope: f64,
    pub population_size: usize,
    pub max_attempts: u32,
}

impl Default for PopulationParams {
    fn default() -> Self {
        PopulationParams {
            skill_alpha: 4.0,
            skill_beta: 2.0,
            persistence_alpha: 8.0,
            persistence_beta: 2.0,
            boredom_alpha: 1.0,
            boredom_beta: 49.0,
            slope: 6.0,
            population_size: DEFAULT_POPULATION,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl PopulationParams {
    pub const FITTED: usize = 7;

    pub fn validate(&self) -> Result<()> {
        let shapes = self.fitted();
        if shapes.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config(format!("population shapes and slope must be positive: {shapes:?}")));
        }
        if self.population_size == 0 || self.max_attempts == 0 {
            return Err(Error::config("population_size and max_attempts must be positive"));
        }
        Ok(())
    }

    /// The seven fitted scalars in a fixed order.
    pub fn fitted(&self) -> [f64; 7] {
        [
            self.skill_alpha,
            self.skill_beta,
            self.persistence_alpha,
            self.persistence_beta,
            self.boredom_alpha,
            self.boredom_beta,
            self.slope,
        ]
    }

    pub fn with_fitted(&self, v: &[f64]) -> Self {
        PopulationParams {
            skill_alpha: v[0],
            skill_beta: v[1],
            persistence_alpha: v[2],
            persistence_beta: v[3],
            boredom_alpha: v[4],
            boredom_beta: v[5],
            slope: v[6],
            ..*self
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("population params serialise")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let p: Self = toml::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))?;
        p.validate().map_err(|e| Error::schema(origin, e.to_string()))?;
        Ok(p)
    }
}

/// Per-level simulation result plus the population trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationOutcome<R> {
    /// One entry per input level. Levels after a truncation report pass 0
    /// and churn 1.
    pub levels: Vec<LevelPrediction<R>>,
    /// Players entering each level.
    pub entering: Vec<usize>,
    /// Index of the first level nobody reached, if the population died out.
    pub truncated_at: Option<usize>,
    /// Attempts that ended at the attempt cap without a pass.
    pub capped: u64,
}

/// Integer tallies for one level; merged across player chunks by addition,
/// so the aggregate does not depend on how players are scheduled.
#[derive(Debug, Clone, Default)]
struct Tally {
    entering: u64,
    attempted: u64,
    churned: u64,
    /// `passes_at[k]` counts players passing on attempt `k + 1`.
    passes_at: Vec<u64>,
    capped: u64,
}

struct Traits {
    skill: Beta<f64>,
    persistence: Beta<f64>,
    boredom: Beta<f64>,
}

const CHUNK: usize = 512;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn simulate_player(
    rng: &mut StreamRng,
    traits: &Traits,
    difficulties: &[f64],
    params: &PopulationParams,
    tallies: &mut [Tally],
) {
    let skill = traits.skill.sample(rng);
    let persistence = traits.persistence.sample(rng);
    let boredom = traits.boredom.sample(rng);
    for (d, tally) in difficulties.iter().zip(tallies.iter_mut()) {
        tally.entering += 1;
        if rng.random::<f64>() < boredom {
            tally.churned += 1;
            return;
        }
        tally.attempted += 1;
        let q = logistic(params.slope * (skill - d));
        let mut attempt = 1;
        loop {
            if rng.random::<f64>() < q {
                tally.passes_at[attempt as usize - 1] += 1;
                break;
            }
            if attempt == params.max_attempts {
                tally.capped += 1;
                break;
            }
            if rng.random::<f64>() >= persistence {
                tally.churned += 1;
                return;
            }
            attempt += 1;
        }
    }
}

/// Plays a population of simulated players through the levels in order.
///
/// Each player draws skill, persistence and boredom from Beta distributions.
/// On every level a player first quits with probability `boredom`, then
/// retries until passing, quitting with probability `1 - persistence` after
/// each failure. Pass probability per attempt is
/// `1 / (1 + exp(-slope * (skill - difficulty)))`.
pub fn simulate_population<R: Real>(
    difficulties: &[R],
    params: &PopulationParams,
    seed: u64,
) -> Result<PopulationOutcome<R>> {
    params.validate()?;
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::config(format!("Beta({a}, {b}): {e}")));
    let traits = Traits {
        skill: beta(params.skill_alpha, params.skill_beta)?,
        persistence: beta(params.persistence_alpha, params.persistence_beta)?,
        boredom: beta(params.boredom_alpha, params.boredom_beta)?,
    };
    let d: Vec<f64> = difficulties.iter().map(|v| v.as_f64()).collect();
    let fresh = || {
        vec![
            Tally {
                passes_at: vec![0; params.max_attempts as usize],
                ..Tally::default()
            };
            d.len()
        ]
    };
    let chunks = params.population_size.div_ceil(CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tallies = fresh();
            let end = ((c + 1) * CHUNK).min(params.population_size);
            for player in c * CHUNK..end {
                let mut rng = rng_from(&[seed, salt::PLAYER, player as u64]);
                simulate_player(&mut rng, &traits, &d, params, &mut tallies);
            }
            tallies
        })
        .reduce(fresh, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.entering += y.entering;
                x.attempted += y.attempted;
                x.churned += y.churned;
                x.capped += y.capped;
                for (p, q) in x.passes_at.iter_mut().zip(y.passes_at) {
                    *p += q;
                }
            }
            a
        });

    let mut levels = Vec::with_capacity(d.len());
    let mut truncated_at = None;
    for (i, t) in tallies.iter().enumerate() {
        let level_id = i as u32 + 1;
        if t.entering == 0 {
            truncated_at.get_or_insert(i);
            levels.push(LevelPrediction {
                level_id,
                pass_rate: R::zero(),
                churn_rate: R::one(),
            });
            continue;
        }
        let credit: f64 = t
            .passes_at
            .iter()
            .enumerate()
            .map(|(k, &n)| n as f64 / (k + 1) as f64)
            .sum();
        let pass = if t.attempted == 0 { 0.0 } else { credit / t.attempted as f64 };
        levels.push(LevelPrediction {
            level_id,
            pass_rate: R::of(pass),
            churn_rate: R::of(t.churned as f64 / t.entering as f64),
        });
    }
    Ok(PopulationOutcome {
        levels,
        entering: tallies.iter().map(|t| t.entering as usize).collect(),
        truncated_at,
        capped: tallies.iter().map(|t| t.capped).sum(),
    })
}
