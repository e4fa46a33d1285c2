//! Level packs on disk: a TOML file with one `[[level]]` table per level.
//!
//! ```toml
//! [[level]]
//! level_id = 1
//! width = 6
//! height = 6
//! num_colors = 3
//! goal_count = 12
//! move_budget = 10
//! refill_seed_salt = 101
//! ```
//!
//! Unknown keys and out-of-range values are rejected on load.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LevelConfig;
use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelPack {
    #[serde(rename = "level", default)]
    pub levels: Vec<LevelConfig>,
}

impl LevelPack {
    pub fn new(levels: Vec<LevelConfig>) -> Result<Self> {
        let pack = LevelPack { levels };
        pack.validate()?;
        Ok(pack)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::config("level pack is empty"));
        }
        let mut ids = BTreeSet::new();
        for level in &self.levels {
            level.validate()?;
            if !ids.insert(level.level_id) {
                return Err(Error::config(format!("duplicate level_id {}", level.level_id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, level_id: u32) -> Option<&LevelConfig> {
        self.levels.iter().find(|l| l.level_id == level_id)
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let pack: LevelPack =
            toml::from_str(text).map_err(|e| Error::schema(origin, e.message().to_string()))?;
        pack.validate()
            .map_err(|e| Error::schema(origin, e.to_string()))?;
        Ok(pack)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("level pack serializes")
    }
}

pub fn load_pack(path: &Path) -> Result<LevelPack> {
    let text = fs::read_to_string(path)?;
    LevelPack::parse(&text, &path.display().to_string())
}

pub fn save_pack(pack: &LevelPack, path: &Path) -> Result<()> {
    write_pack(pack, path, None)
}

/// Writes a pack, optionally preceded by a `#` comment line.
pub fn write_pack(pack: &LevelPack, path: &Path, header: Option<&str>) -> Result<()> {
    let mut text = String::new();
    if let Some(h) = header {
        text.push_str("# ");
        text.push_str(h);
        text.push('\n');
    }
    text.push_str(&pack.to_toml());
    fs::write(path, text)?;
    Ok(())
}

fn level(
    level_id: u32,
    size: u32,
    num_colors: u32,
    goal_count: u32,
    move_budget: u32,
) -> LevelConfig {
    LevelConfig {
        level_id,
        width: size,
        height: size,
        num_colors,
        goal_count,
        move_budget,
        refill_seed_salt: 1000 + u64::from(level_id),
    }
}

/// The ten reference levels, easiest first. Levels 1-5 are E1-E5; levels
/// 6-10 are H1-H5, the hardest five.
pub fn reference_pack() -> LevelPack {
    LevelPack {
        levels: vec![
            level(1, 6, 3, 8, 12),
            level(2, 6, 3, 14, 12),
            level(3, 7, 4, 14, 14),
            level(4, 7, 4, 18, 14),
            level(5, 6, 5, 8, 12),
            level(6, 8, 6, 14, 13),
            level(7, 7, 6, 10, 12),
            level(8, 8, 4, 26, 14),
            level(9, 8, 5, 18, 14),
            level(10, 7, 5, 14, 12),
        ],
    }
}

/// A pack of `count` procedurally drawn levels covering easy to very hard,
/// in shuffled difficulty order.
pub fn evaluation_pack(count: u32, seed: u64) -> LevelPack {
    let mut rng = rng_from(&[seed, 0xE7A1]);
    let levels = (1..=count)
        .map(|level_id| {
            let size = rng.random_range(6..=8);
            let num_colors = rng.random_range(3..=6);
            let move_budget = rng.random_range(10..=16);
            // goal tiles a decent player clears per move shrinks with colours
            let per_move = f64::from(size * size) / f64::from(num_colors * num_colors) * 0.45;
            let tightness = rng.random_range(0.6..2.4);
            let goal_count = (per_move * f64::from(move_budget) * tightness).round().max(4.0) as u32;
            LevelConfig {
                level_id,
                width: size,
                height: size,
                num_colors,
                goal_count,
                move_budget,
                refill_seed_salt: rng.random_range(0..i64::MAX as u64),
            }
        })
        .collect();
    LevelPack { levels }
}
