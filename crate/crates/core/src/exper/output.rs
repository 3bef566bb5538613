//! CSV and JSON-sidecar emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::fit::FIT_FORM;
use super::runs::ExperimentRecord;
use crate::error::Result;

pub const CSV_HEADER: [&str; 12] = [
    "experiment_id",
    "seed",
    "n_a",
    "n_b",
    "theta",
    "magic",
    "depth",
    "t",
    "norm_kind",
    "mean",
    "std_err",
    "reps",
];

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment_id.clone(),
            r.seed.to_string(),
            r.n_a.to_string(),
            r.n_b.to_string(),
            format_float(r.theta),
            format_float(r.magic),
            r.depth.to_string(),
            r.t.to_string(),
            r.norm_kind.tag().to_string(),
            format_float(r.mean),
            format_float(r.std_err),
            r.reps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, records)
}

/// `runs/decay.csv` → `runs/decay.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    if csv_path.extension().is_some_and(|e| e == "json") {
        csv_path.with_extension("meta.json")
    } else {
        csv_path.with_extension("json")
    }
}

/// Sidecar document: config, software version, fit form and results.
pub fn sidecar<T: Serialize>(config: &ExperimentConfig, results: &T) -> Result<Value> {
    Ok(json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": serde_json::to_value(config)?,
        "fit_form": FIT_FORM,
        "results": serde_json::to_value(results)?,
    }))
}

pub fn write_sidecar<T: Serialize>(path: &Path, config: &ExperimentConfig, results: &T) -> Result<()> {
    let doc = sidecar(config, results)?;
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    Ok(())
}
