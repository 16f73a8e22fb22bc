use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use convoy_core::compare::{write_comparison, ComparisonSetup};
use convoy_core::metrics::MetricsTable;
use convoy_core::plot::plot_metrics;
use convoy_core::{load_scenario, run_scenario, RunOptions};

#[derive(Parser)]
#[command(name = "convoy-sim", version, about = "Multi-agent convoy monitoring simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write metrics and a summary.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the control period (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Override the simulated duration (s).
        #[arg(long)]
        duration: Option<f64>,
        /// Also write a JSON-lines copy of the metrics.
        #[arg(long)]
        jsonl: bool,
        /// Render the standard plots into the output directory.
        #[arg(long)]
        plot: bool,
    },
    /// Compare the constant-gain and curvature-weighted offset laws.
    CompareGuidance {
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG plots from a metrics CSV.
    Plot {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            dt,
            duration,
            jsonl,
            plot,
        } => {
            let mut cfg = load_scenario(&scenario)?;
            if let Some(dt) = dt {
                cfg.dt = dt;
            }
            if let Some(d) = duration {
                cfg.duration = d;
            }
            cfg.validate()?;
            let output = run_scenario(
                &cfg,
                &out,
                &RunOptions {
                    jsonl,
                    keep_records: false,
                },
            )?;
            let s = &output.summary;
            println!(
                "{}: {} ticks, settling time {}, violations {}",
                s.scenario,
                s.ticks,
                s.settling_time.map_or("none".to_string(), |t| format!("{t:.2} s")),
                s.constraint_violations
            );
            println!("metrics: {}", output.metrics_path.display());
            println!("summary: {}", output.summary_path.display());
            if plot {
                let table = MetricsTable::read(&output.metrics_path)?;
                plot_metrics(&table, &out)?;
            }
        }
        Command::CompareGuidance { out } => {
            let report = write_comparison(&ComparisonSetup::default(), &out)?;
            let secs = |t: Option<f64>| t.map_or("never".to_string(), |t| format!("{t:.2} s"));
            for r in [&report.constant_gain, &report.curvature_weighted] {
                println!(
                    "{:?} (k_gamma = {}): settled {}, steady vertex |gamma - 1| {:.4}",
                    r.law,
                    r.k_gamma,
                    secs(r.settling_time),
                    r.steady_vertex_gamma_error
                );
            }
            println!("report: {}", out.join("comparison.json").display());
        }
        Command::Plot { metrics, out } => {
            let table = MetricsTable::read(&metrics).with_context(|| format!("reading {}", metrics.display()))?;
            for p in plot_metrics(&table, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
