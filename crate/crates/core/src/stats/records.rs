//! Per-run outcomes and the runs CSV.
//!
//! Columns: `level_id,seed,agent,passed,moves_used,moves_left,goals_cleared_fraction`.
//! Lines starting with `#` are comments.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub level_id: u32,
    pub seed: u64,
    pub agent: String,
    pub passed: bool,
    pub moves_used: u32,
    /// Budget minus moves used when passed, zero otherwise.
    pub moves_left: u32,
    pub goals_cleared_fraction: f64,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.goals_cleared_fraction) {
            return Err(Error::contract(format!(
                "goals_cleared_fraction {} outside [0, 1]",
                self.goals_cleared_fraction
            )));
        }
        if self.passed && self.goals_cleared_fraction != 1.0 {
            return Err(Error::contract("passed run without all goals cleared"));
        }
        if self.moves_left > 0 && !self.passed {
            return Err(Error::contract("moves left on a failed run"));
        }
        Ok(())
    }
}

pub fn write_runs<W: Write>(out: W, header: Option<&str>, records: &[RunRecord]) -> Result<()> {
    let mut out = out;
    if let Some(h) = header {
        writeln!(out, "# {h}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs<R: Read>(input: R, origin: &str) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let expected = ["level_id", "seed", "agent", "passed", "moves_used", "moves_left", "goals_cleared_fraction"];
    let headers = reader.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::schema(origin, format!("expected header {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for (line, row) in reader.deserialize::<RunRecord>().enumerate() {
        let record = row.map_err(|e| Error::schema(origin, format!("row {}: {e}", line + 1)))?;
        record
            .validate()
            .map_err(|e| Error::schema(origin, format!("row {}: {e}", line + 1)))?;
        out.push(record);
    }
    Ok(out)
}
