//! Trace serialization.
//!
//! CSV output is three files: the traces themselves at the given path, with
//! columns `policy,seed,t,pseudo_regret,arm_pulls_0..arm_pulls_{K-1}`, plus
//! `<stem>.bounds.csv` and (with two or more seeds) `<stem>.summary.csv`.
//! JSON output is a single document tagged with [`SCHEMA`].

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::config::OutputFormat;
use super::run::{BoundCurve, ExperimentOutput, RegretSummary, RegretTrace};
use super::HarnessError;

pub const SCHEMA: &str = "tpmab-trace/1";

pub fn write_traces_csv<W: Write>(traces: &[RegretTrace], out: W) -> Result<(), HarnessError> {
    let arms = traces
        .first()
        .and_then(|tr| tr.points.first())
        .map(|p| p.arm_pulls.len())
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "policy".to_string(),
        "seed".into(),
        "t".into(),
        "pseudo_regret".into(),
    ];
    header.extend((0..arms).map(|i| format!("arm_pulls_{i}")));
    w.write_record(&header)?;
    for tr in traces {
        for p in &tr.points {
            let mut row = vec![
                tr.policy.clone(),
                tr.seed.to_string(),
                p.t.to_string(),
                p.pseudo_regret.to_string(),
            ];
            row.extend(p.arm_pulls.iter().map(u64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_bounds_csv<W: Write>(
    config_hash: &str,
    curves: &[BoundCurve],
    out: W,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["config_hash", "pmf", "bound_kind", "t", "value"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                config_hash,
                &c.pmf,
                c.bound_kind.as_str(),
                &p.t.to_string(),
                &p.value.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[RegretSummary], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["config_hash", "policy", "runs", "t", "mean", "stddev"])?;
    for s in summaries {
        for p in &s.points {
            w.write_record([
                s.config_hash.as_str(),
                &s.policy,
                &s.runs.to_string(),
                &p.t.to_string(),
                &p.mean.to_string(),
                &p.stddev.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_json<W: Write>(output: &ExperimentOutput, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, output)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|source| HarnessError::Io {
            path: PathBuf::from("<writer>"),
            source,
        })?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<ExperimentOutput, HarnessError> {
    let output: ExperimentOutput = serde_json::from_reader(input)?;
    if output.schema != SCHEMA {
        return Err(HarnessError::Config {
            path: "schema".into(),
            reason: format!("expected `{SCHEMA}`, found `{}`", output.schema),
        });
    }
    Ok(output)
}

/// `results.csv` -> `results.<tag>.csv`.
pub fn sidecar_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes `output` to `path`, or to stdout when `path` is `None` (CSV then
/// carries the traces only).
pub fn emit(output: &ExperimentOutput, format: OutputFormat, path: Option<&Path>) -> Result<(), HarnessError> {
    if output.traces.is_empty() {
        return Err(HarnessError::Empty);
    }
    match (format, path) {
        (OutputFormat::Json, Some(p)) => write_json(output, create(p)?),
        (OutputFormat::Json, None) => write_json(output, io::stdout().lock()),
        (OutputFormat::Csv, None) => write_traces_csv(&output.traces, io::stdout().lock()),
        (OutputFormat::Csv, Some(p)) => {
            write_traces_csv(&output.traces, create(p)?)?;
            write_bounds_csv(&output.config_hash, &output.bounds, create(&sidecar_path(p, "bounds"))?)?;
            if !output.summaries.is_empty() {
                write_summary_csv(&output.summaries, create(&sidecar_path(p, "summary"))?)?;
            }
            Ok(())
        }
    }
}
