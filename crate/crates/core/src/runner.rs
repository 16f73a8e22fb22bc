//! Runs a scenario to completion and writes its outputs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{MetricsWriter, RunSummary, SummaryBuilder};
use crate::scenario::ScenarioConfig;
use crate::sim::MetricsRecord;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Also write a JSON-lines copy of the metrics next to the CSV.
    pub jsonl: bool,
    /// Keep every record in memory and return it.
    pub keep_records: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub metrics_path: PathBuf,
    pub summary_path: PathBuf,
    pub records: Vec<MetricsRecord>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Simulates `cfg.duration` seconds, writing the metrics CSV and summary
/// JSON into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutput> {
    let mut world = cfg.build_world()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let metrics_path = out_dir.join(&cfg.output.metrics);
    let summary_path = out_dir.join(&cfg.output.summary);
    let jsonl = if opts.jsonl {
        Some(create(&metrics_path.with_extension("jsonl"))?)
    } else {
        None
    };
    let mut writer = MetricsWriter::new(create(&metrics_path)?, jsonl, cfg.n_a, cfg.n_t)?;
    let env = world.params().envelope;
    let mut summary = SummaryBuilder::new(cfg.d_th, env.v_a_min, env.v_a_max, cfg.omega_max);
    let mut records = Vec::new();

    for _ in 0..cfg.ticks() {
        let rec = world.step();
        writer.write(&rec).map_err(|e| with_path(e, &metrics_path))?;
        summary.push(&rec);
        if opts.keep_records {
            records.push(rec);
        }
    }
    writer.finish().map_err(|e| with_path(e, &metrics_path))?;

    let summary = summary.finish(&cfg.name, cfg.dt, cfg.n_a);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, json + "\n").map_err(|e| Error::io(&summary_path, e))?;

    Ok(RunOutput {
        summary,
        metrics_path,
        summary_path,
        records,
    })
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        Error::Csv { row, message, .. } => Error::Csv {
            path: path.to_path_buf(),
            row,
            message,
        },
        other => other,
    }
}
