//! File outputs consumed by the plotting scripts.
//!
//! * `traces.csv`: `realization,iteration,y12,y13,y23,h1,h2,h3`, one row per
//!   realization and 1-based iteration, floats with 17 significant digits.
//! * `summary.json`: [`SummaryDocument`].
//! * `table1.csv`: `pair,full,baseline`, mean misalignment at `t*` per pair.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::RunConfig;
use crate::harness::{CampaignSummary, RealizationResult};
use crate::seeker::Variant;

pub const TRACES_FILE: &str = "traces.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLE1_FILE: &str = "table1.csv";

pub const TRACES_HEADER: &str = "realization,iteration,y12,y13,y23,h1,h2,h3";
pub const TABLE1_HEADER: &str = "pair,full,baseline";
pub const PAIR_LABELS: [&str; 3] = ["y12", "y13", "y23"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub variant: Variant,
    pub pairs: [String; 3],
    #[serde(flatten)]
    pub summary: CampaignSummary,
    pub config: RunConfig,
    pub fingerprint: String,
}

/// One row of `table1.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1 {
    pub full: [f64; 3],
    pub baseline: [f64; 3],
}

/// Hash of the crate version and every config field that affects results.
pub fn fingerprint(cfg: &RunConfig) -> String {
    let neutral = RunConfig {
        output_dir: PathBuf::new(),
        worker_count: 0,
        ..cfg.clone()
    };
    let mut hasher = Sha256::new();
    hasher.update(env!("CARGO_PKG_NAME").as_bytes());
    hasher.update(b"\0");
    hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
    hasher.update(b"\0");
    hasher.update(serde_json::to_vec(&neutral).expect("config serializes"));
    hex::encode(hasher.finalize())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_traces<W: Write>(out: &mut W, results: &[RealizationResult]) -> std::io::Result<()> {
    writeln!(out, "{TRACES_HEADER}")?;
    for r in results {
        for (k, (y, h)) in r.y.iter().zip(&r.h).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.index,
                k + 1,
                fmt(y[0]),
                fmt(y[1]),
                fmt(y[2]),
                fmt(h[0]),
                fmt(h[1]),
                fmt(h[2]),
            )?;
        }
    }
    Ok(())
}

pub fn write_table1<W: Write>(out: &mut W, table: &Table1) -> std::io::Result<()> {
    writeln!(out, "{TABLE1_HEADER}")?;
    for (i, label) in PAIR_LABELS.iter().enumerate() {
        writeln!(out, "{label},{},{}", fmt(table.full[i]), fmt(table.baseline[i]))?;
    }
    Ok(())
}

pub fn summary_document(summary: &CampaignSummary, cfg: &RunConfig, variant: Variant) -> SummaryDocument {
    SummaryDocument {
        variant,
        pairs: PAIR_LABELS.map(String::from),
        summary: summary.clone(),
        config: cfg.clone(),
        fingerprint: fingerprint(cfg),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Writes `traces.csv` and `summary.json` into `dir`, creating it if needed.
pub fn emit_results(
    results: &[RealizationResult],
    summary: &CampaignSummary,
    cfg: &RunConfig,
    variant: Variant,
    dir: &Path,
) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let traces = dir.join(TRACES_FILE);
    let mut w = create(&traces)?;
    write_traces(&mut w, results)
        .and_then(|_| w.flush())
        .map_err(io_err(&traces))?;

    let summary_path = dir.join(SUMMARY_FILE);
    let mut w = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut w, &summary_document(summary, cfg, variant)).map_err(|source| {
        OutputError::Json {
            path: summary_path.clone(),
            source,
        }
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&summary_path))?;

    Ok(vec![traces, summary_path])
}

/// Writes `table1.csv` into `dir`.
pub fn emit_table1(table: &Table1, dir: &Path) -> Result<PathBuf, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(TABLE1_FILE);
    let mut w = create(&path)?;
    write_table1(&mut w, table)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    Ok(path)
}
