//! Command-line interface.
//!
//! Exit codes: 0 success, 1 validation error, 2 training divergence,
//! 3 missing artifacts.

use crate::checkpoint::Checkpoint;
use crate::config::{RunConfig, Scale, ScenarioName};
use crate::config::EvalScenario;
use crate::evalrun::{evaluate, SUMMARY_CSV_HEADER};
use crate::matrix::{run_matrix, MissingArtifacts};
use crate::plot::plot_from_runs;
use crate::trainer::{train, Timing, TrainOutcome};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "dockrl",
    about = "Train and evaluate underwater docking controllers in a self-contained simulator",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one seed of a run configuration.
    Train {
        /// Run configuration TOML (a preset name plus overrides).
        #[arg(long)]
        config: PathBuf,
        /// Training seed.
        #[arg(long)]
        seed: u64,
        /// Lane/iteration profile.
        #[arg(long, value_enum, default_value_t = Scale::Paper)]
        scale: Scale,
        /// Output directory (default runs/<config-name>/<seed>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Wall-clock column policy; `none` makes logs seed-reproducible.
        #[arg(long, value_enum, default_value_t = Timing::Wall)]
        timing: Timing,
    },
    /// Evaluate a checkpoint under one payload scenario.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum)]
        scenario: ScenarioName,
        /// Episodes per scenario.
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        /// Output directory (default: the run's eval/ directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every trained (config, seed) across all scenarios and
    /// aggregate the report.
    Matrix {
        /// Directory holding runs/<config>/<seed>/ trees.
        #[arg(long)]
        runs: PathBuf,
        /// Report directory (default: <runs>/../reports).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
    },
    /// Regenerate charts from evaluation CSVs.
    Plot {
        /// Directory holding runs/<config>/<seed>/eval/*.csv.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run() -> u8 {
    run_from(std::env::args())
}

/// Parse and execute; usage errors count as validation failures (exit 1),
/// help and version requests exit 0.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.exit_code() == 0 { 0 } else { 1 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<MissingArtifacts>().is_some() {
                3
            } else {
                1
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Train {
            config,
            seed,
            scale,
            out,
            timing,
        } => {
            let run = RunConfig::load(&config, scale)?;
            let out_dir =
                out.unwrap_or_else(|| PathBuf::from("runs").join(&run.name).join(seed.to_string()));
            let artifacts = train(&run, seed, &out_dir, timing)?;
            match artifacts.outcome {
                TrainOutcome::Completed => {
                    println!(
                        "trained {} seed {seed}: checkpoint {}",
                        run.name,
                        artifacts.final_checkpoint.display()
                    );
                    Ok(0)
                }
                TrainOutcome::Diverged { iteration, detail } => {
                    eprintln!(
                        "training diverged at iteration {iteration}: {detail}; last good \
                         checkpoint retained"
                    );
                    Ok(2)
                }
            }
        }
        Command::Eval {
            checkpoint,
            scenario,
            episodes,
            out,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let run_dir = checkpoint
                .parent()
                .and_then(|p| p.parent())
                .map(PathBuf::from);
            let run = match &run_dir {
                Some(dir) if dir.join("resolved_config.toml").exists() => {
                    let text = std::fs::read_to_string(dir.join("resolved_config.toml"))?;
                    let cfg: RunConfig = toml::from_str(&text).context("parsing echoed config")?;
                    cfg.validate()?;
                    cfg
                }
                _ => {
                    let mut cfg = RunConfig::preset("naive")?;
                    cfg.env.history_len = ckpt.history_len as usize;
                    cfg
                }
            };
            let spec = EvalScenario::with_episodes(scenario, episodes);
            let result = evaluate(&ckpt, &run, &spec)?;
            let out_dir = out
                .or_else(|| run_dir.map(|d| d.join("eval")))
                .unwrap_or_else(|| PathBuf::from("eval"));
            let csv_path = out_dir.join(format!("{}.csv", scenario.as_str()));
            result.write_csv(&csv_path)?;
            println!("{SUMMARY_CSV_HEADER}");
            println!(
                "{}",
                result.summary_row(&run.name, ckpt.train_seed, scenario.as_str())
            );
            println!("series: {}", csv_path.display());
            Ok(0)
        }
        Command::Matrix { runs, out, episodes } => {
            let out_dir = out.unwrap_or_else(|| {
                runs.parent()
                    .map(|p| p.join("reports"))
                    .unwrap_or_else(|| PathBuf::from("reports"))
            });
            let report = run_matrix(&runs, &out_dir, &ScenarioName::ALL, episodes)?;
            println!(
                "matrix complete: {} episode records, {} charts under {}",
                report.episode_records,
                report.plots.len(),
                out_dir.display()
            );
            print!("{}", report.ordering);
            Ok(0)
        }
        Command::Plot { input, out } => {
            let written = plot_from_runs(&input, &out)?;
            if written.is_empty() {
                anyhow::bail!("no evaluation CSVs found under {}", input.display());
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}
