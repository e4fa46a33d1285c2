//! Features CSV (`level_id,feature_set,<feature names…>`) and sweep CSV
//! (`fraction,feature,rho`, empty rho for undefined cells).

use std::io::{Read, Write};

use super::features::{FeatureSet, FeatureVector, F3_NAMES};
use super::sweep::SweepCell;
use crate::error::{Error, Result};

fn comment<W: Write>(out: &mut W, header: Option<&str>) -> Result<()> {
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    Ok(())
}

/// Every vector must come from the same feature set.
pub fn write_features<W: Write>(mut out: W, header: Option<&str>, rows: &[FeatureVector]) -> Result<()> {
    comment(&mut out, header)?;
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let set = first.feature_set;
    if rows.iter().any(|r| r.feature_set != set) {
        return Err(Error::contract("mixed feature sets in one features table"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["level_id", "feature_set"];
    head.extend(set.names());
    w.write_record(&head)?;
    for row in rows {
        let mut fields = vec![row.level_id.to_string(), set.tag().to_string()];
        fields.extend(row.values.iter().map(|(_, v)| v.to_string()));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(input: R, origin: &str) -> Result<Vec<FeatureVector>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let head = reader.headers()?.clone();
    if head.len() < 3 || &head[0] != "level_id" || &head[1] != "feature_set" {
        return Err(Error::schema(origin, "expected level_id,feature_set,<features>"));
    }
    let names: Vec<&str> = head.iter().skip(2).collect();
    if !FeatureSet::ALL.iter().any(|s| s.names() == names.as_slice()) {
        return Err(Error::schema(origin, "feature columns match no feature set"));
    }
    let mut table_set = None;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::schema(origin, format!("row {}: {m}", i + 1));
        let level_id: u32 = rec[0].parse().map_err(|e| bad(format!("level_id: {e}")))?;
        let set: FeatureSet = rec[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        if set.names() != names.as_slice() || *table_set.get_or_insert(set) != set {
            return Err(bad(format!("feature_set '{}' does not match the columns", &rec[1])));
        }
        let mut values = Vec::with_capacity(names.len());
        for (name, field) in names.iter().zip(rec.iter().skip(2)) {
            let v: f64 = field.parse().map_err(|e| bad(format!("{name}: {e}")))?;
            if !v.is_finite() {
                return Err(bad(format!("{name} is not finite")));
            }
            values.push((name.to_string(), v));
        }
        rows.push(FeatureVector {
            level_id,
            feature_set: set,
            values,
        });
    }
    Ok(rows)
}

pub fn write_sweep<W: Write>(mut out: W, header: Option<&str>, cells: &[SweepCell]) -> Result<()> {
    comment(&mut out, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fraction", "feature", "rho"])?;
    for c in cells {
        let rho = c.rho.map(|r| r.to_string()).unwrap_or_default();
        w.write_record([c.fraction.to_string(), c.feature.to_string(), rho])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep<R: Read>(input: R, origin: &str) -> Result<Vec<SweepCell>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    if reader.headers()?.iter().ne(["fraction", "feature", "rho"]) {
        return Err(Error::schema(origin, "expected header fraction,feature,rho"));
    }
    let mut cells = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::schema(origin, format!("row {}: {m}", i + 1));
        let fraction: f64 = rec[0].parse().map_err(|e| bad(format!("fraction: {e}")))?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(bad(format!("fraction {fraction} outside (0, 1]")));
        }
        let feature = F3_NAMES
            .into_iter()
            .find(|n| *n == &rec[1])
            .ok_or_else(|| bad(format!("unknown feature '{}'", &rec[1])))?;
        let rho = match &rec[2] {
            "" => None,
            v => Some(v.parse::<f64>().map_err(|e| bad(format!("rho: {e}")))?),
        };
        cells.push(SweepCell { fraction, feature, rho });
    }
    Ok(cells)
}
