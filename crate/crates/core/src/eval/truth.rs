//! Truth CSV: `level_id,pass_rate,churn_rate`, `#` comment lines allowed.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub level_id: u32,
    pub pass_rate: f64,
    pub churn_rate: f64,
}

impl GroundTruthRecord {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if !ok(self.pass_rate) || !ok(self.churn_rate) {
            return Err(Error::contract(format!("level {} rates outside [0, 1]", self.level_id)));
        }
        Ok(())
    }
}

pub fn write_truth<W: Write>(mut out: W, header: Option<&str>, records: &[GroundTruthRecord]) -> Result<()> {
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(input: R, origin: &str) -> Result<Vec<GroundTruthRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    if reader.headers()?.iter().ne(["level_id", "pass_rate", "churn_rate"]) {
        return Err(Error::schema(origin, "expected header level_id,pass_rate,churn_rate"));
    }
    reader
        .deserialize::<GroundTruthRecord>()
        .enumerate()
        .map(|(i, row)| {
            let r = row.map_err(|e| Error::schema(origin, format!("row {}: {e}", i + 1)))?;
            r.validate()
                .map_err(|e| Error::schema(origin, format!("row {}: {e}", i + 1)))?;
            Ok(r)
        })
        .collect()
}
