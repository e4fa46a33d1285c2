use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static definition of one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub level_id: u32,
    pub width: u32,
    pub height: u32,
    pub num_colors: u32,
    /// Goal-coloured tiles to clear.
    pub goal_count: u32,
    /// Moves a human player gets.
    pub move_budget: u32,
    pub refill_seed_salt: u64,
}

impl LevelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(format!("level {}: {msg}", self.level_id)));
        if self.level_id < 1 {
            return bad("level_id must be >= 1".into());
        }
        for (name, v) in [("width", self.width), ("height", self.height)] {
            if !(4..=16).contains(&v) {
                return bad(format!("{name}={v} outside [4, 16]"));
            }
        }
        if !(1..=8).contains(&self.num_colors) {
            return bad(format!("num_colors={} outside [1, 8]", self.num_colors));
        }
        if self.goal_count < 1 {
            return bad("goal_count must be >= 1".into());
        }
        if self.goal_count > 10 * self.width * self.height {
            return bad(format!(
                "goal_count={} exceeds 10 * width * height",
                self.goal_count
            ));
        }
        if self.move_budget < 1 {
            return bad("move_budget must be >= 1".into());
        }
        if self.refill_seed_salt > i64::MAX as u64 {
            return bad("refill_seed_salt must fit in a signed 64-bit integer".into());
        }
        Ok(())
    }

    pub fn cells(&self) -> u32 {
        self.width * self.height
    }
}
