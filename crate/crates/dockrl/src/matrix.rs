//! The full evaluation matrix: every trained (config, seed) checkpoint is
//! run through every payload scenario, producing per-episode records, seed
//! aggregates, the six summary charts, and a qualitative ordering report.

use crate::checkpoint::Checkpoint;
use crate::config::{EvalScenario, RunConfig, Scale, ScenarioName, PRESET_NAMES};
use crate::evalrun::{evaluate, EvalResult, SUMMARY_CSV_HEADER};
use crate::plot::plot_from_runs;
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EPISODES_CSV_HEADER: &str =
    "config,seed,scenario,episode,final_pos_err_m,final_ang_err_rad,success,return";

/// Cells the matrix could not evaluate because their checkpoints are
/// missing; maps to exit code 3.
#[derive(Debug, Clone)]
pub struct MissingArtifacts(pub Vec<String>);

impl std::fmt::Display for MissingArtifacts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "missing checkpoints for: {}", self.0.join(", "))
    }
}

impl std::error::Error for MissingArtifacts {}

#[derive(Debug, Clone)]
pub struct MatrixReport {
    pub episode_records: usize,
    pub skipped_cells: Vec<String>,
    pub plots: Vec<PathBuf>,
    pub ordering: String,
}

struct Cell {
    config: String,
    seed: u64,
    scenario: &'static str,
    result: EvalResult,
}

/// Run the matrix over `runs_dir`, writing reports into `out_dir`.
///
/// Expects `runs_dir/<config>/<seed>/checkpoints/final.ckpt` for each of
/// the four presets and each seed directory present. Missing checkpoints
/// are reported and skipped; if any were missing the returned error is
/// [`MissingArtifacts`] (after every available cell has been processed).
/// An empty scenario list yields an empty (header-only) report.
pub fn run_matrix(
    runs_dir: &Path,
    out_dir: &Path,
    scenarios: &[ScenarioName],
    episodes: usize,
) -> Result<MatrixReport> {
    std::fs::create_dir_all(out_dir)?;
    let mut cells: Vec<Cell> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    if scenarios.is_empty() {
        std::fs::write(
            out_dir.join("episodes.csv"),
            format!("{EPISODES_CSV_HEADER}
"),
        )?;
        std::fs::write(out_dir.join("summary.csv"), format!("{SUMMARY_CSV_HEADER}
"))?;
        return Ok(MatrixReport {
            episode_records: 0,
            skipped_cells: Vec::new(),
            plots: Vec::new(),
            ordering: String::from("no scenarios requested\n"),
        });
    }

    for config in PRESET_NAMES {
        let config_dir = runs_dir.join(config);
        if !config_dir.is_dir() {
            skipped.push(format!("{config} (no runs)"));
            continue;
        }
        for seed in expected_seeds(&config_dir)? {
            let run_dir = config_dir.join(seed.to_string());
            let ckpt_path = run_dir.join("checkpoints").join("final.ckpt");
            if !ckpt_path.exists() {
                skipped.push(format!("{config}/{seed}"));
                continue;
            }
            let ckpt = Checkpoint::load(&ckpt_path)?;
            let run = load_run_config(&run_dir, config)?;
            for &name in scenarios {
                let scenario = EvalScenario::with_episodes(name, episodes);
                let result = evaluate(&ckpt, &run, &scenario)
                    .with_context(|| format!("evaluating {config}/{seed}/{}", name.as_str()))?;
                result.write_csv(
                    &run_dir.join("eval").join(format!("{}.csv", name.as_str())),
                )?;
                cells.push(Cell {
                    config: config.to_string(),
                    seed,
                    scenario: name.as_str(),
                    result,
                });
            }
        }
    }

    // Per-episode records.
    let mut episodes_csv = String::from(EPISODES_CSV_HEADER);
    episodes_csv.push('\n');
    let mut episode_records = 0usize;
    for cell in &cells {
        for (i, e) in cell.result.episodes.iter().enumerate() {
            let _ = writeln!(
                episodes_csv,
                "{},{},{},{},{},{},{},{}",
                cell.config,
                cell.seed,
                cell.scenario,
                i,
                e.final_pos_err(),
                e.final_ang_err(),
                e.success,
                e.ret
            );
            episode_records += 1;
        }
    }
    std::fs::write(out_dir.join("episodes.csv"), episodes_csv)?;

    // Summary rows.
    let mut summary = String::from(SUMMARY_CSV_HEADER);
    summary.push('\n');
    for cell in &cells {
        summary.push_str(&cell.result.summary_row(&cell.config, cell.seed, cell.scenario));
        summary.push('\n');
    }
    std::fs::write(out_dir.join("summary.csv"), summary)?;

    // Aggregated series and the six charts from the CSVs just written.
    let plots = plot_from_runs(runs_dir, out_dir)?;

    let ordering = ordering_report(&cells);
    std::fs::write(out_dir.join("qualitative_ordering.txt"), &ordering)?;

    let report = MatrixReport {
        episode_records,
        skipped_cells: skipped.clone(),
        plots,
        ordering,
    };
    if !skipped.is_empty() {
        return Err(MissingArtifacts(skipped).into());
    }
    Ok(report)
}

fn seed_dirs(config_dir: &Path) -> Result<Vec<u64>> {
    let mut seeds: Vec<u64> = std::fs::read_dir(config_dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_string_lossy().parse::<u64>().ok())
        .collect();
    seeds.sort_unstable();
    Ok(seeds)
}

/// Seeds the matrix must cover for one config: the seed dirs on disk plus
/// whatever the echoed run config promises, so a missing seed is flagged
/// instead of silently narrowing the report.
fn expected_seeds(config_dir: &Path) -> Result<Vec<u64>> {
    let mut seeds = seed_dirs(config_dir)?;
    for seed in seeds.clone() {
        let echoed = config_dir.join(seed.to_string()).join("resolved_config.toml");
        if let Ok(text) = std::fs::read_to_string(&echoed) {
            if let Ok(cfg) = toml::from_str::<RunConfig>(&text) {
                seeds.extend(cfg.seeds);
                break;
            }
        }
    }
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}

/// Prefer the echoed config from the run directory; fall back to the named
/// preset so hand-assembled run trees still evaluate.
fn load_run_config(run_dir: &Path, config: &str) -> Result<RunConfig> {
    let echoed = run_dir.join("resolved_config.toml");
    if echoed.exists() {
        let text = std::fs::read_to_string(&echoed)?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", echoed.display()))?;
        cfg.validate()?;
        Ok(cfg)
    } else {
        RunConfig::preset(config).map(|mut c| {
            c.apply_scale(Scale::Paper);
            c
        })
    }
}

/// Observed cross-config orderings on the matrix medians. Informational:
/// seed variance can legitimately flip these at desk scale, so the report
/// records rather than gates.
fn ordering_report(cells: &[Cell]) -> String {
    let mut out = String::from("qualitative ordering (informational, not a gate)\n\n");
    let median_of = |config: &str, scenario: &str, angular: bool| -> Option<f64> {
        let mut finals: Vec<f64> = cells
            .iter()
            .filter(|c| c.config == config && c.scenario == scenario)
            .flat_map(|c| {
                c.result.episodes.iter().map(move |e| {
                    if angular {
                        e.final_ang_err()
                    } else {
                        e.final_pos_err()
                    }
                })
            })
            .collect();
        if finals.is_empty() {
            return None;
        }
        finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = finals.len() / 2;
        Some(if finals.len() % 2 == 1 {
            finals[mid]
        } else {
            0.5 * (finals[mid - 1] + finals[mid])
        })
    };

    out.push_str("median final positional error, hard scenario:\n");
    for config in PRESET_NAMES {
        if let Some(m) = median_of(config, "hard", false) {
            let _ = writeln!(out, "  {config:<18} {m:.4} m");
        }
    }
    if let (Some(large), Some(naive)) =
        (median_of("large_dr", "hard", false), median_of("naive", "hard", false))
    {
        let verdict = if large <= naive { "HOLDS" } else { "FLIPPED" };
        let _ = writeln!(
            out,
            "  expectation large_dr <= naive on hard: {verdict} ({large:.4} vs {naive:.4})"
        );
    }

    out.push_str("\nmedian final angular error per scenario:\n");
    for scenario in ["easy", "medium", "hard"] {
        let mut worst: Option<(&str, f64)> = None;
        for config in PRESET_NAMES {
            if let Some(m) = median_of(config, scenario, true) {
                let _ = writeln!(out, "  {scenario:<7} {config:<18} {m:.4} rad");
                if worst.is_none_or(|(_, w)| m > w) {
                    worst = Some((config, m));
                }
            }
        }
        if let Some((config, _)) = worst {
            let verdict = if config == "small_dr" { "HOLDS" } else { "FLIPPED" };
            let _ = writeln!(
                out,
                "  expectation small_dr ranks worst on {scenario}: {verdict} (worst = {config})"
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::{train, Timing};

    fn tiny_run(preset: &str) -> RunConfig {
        RunConfig::parse(
            &format!(
                r#"
                preset = "{preset}"
                seeds = [0, 1]
                [ppo]
                num_envs = 2
                iterations = 1
                rollout_len = 4
                minibatches = 2
                epochs = 1
                [env]
                episode_len = 6
                [train]
                hidden_layers = [4]
                checkpoint_every = 10
                "#
            ),
            Scale::Paper,
        )
        .unwrap()
    }

    #[test]
    fn matrix_counts_records_and_emits_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().join("runs");
        for preset in PRESET_NAMES {
            for seed in [0u64, 1] {
                let out = runs.join(preset).join(seed.to_string());
                train(&tiny_run(preset), seed, &out, Timing::None).unwrap();
            }
        }
        let reports = dir.path().join("reports");
        let report = run_matrix(&runs, &reports, &ScenarioName::ALL, 2).unwrap();
        // 4 configs x 2 seeds x 3 scenarios x 2 episodes.
        assert_eq!(report.episode_records, 48);
        assert!(report.skipped_cells.is_empty());
        assert_eq!(report.plots.len(), 6);
        for name in [
            "pos_easy.svg",
            "pos_medium.svg",
            "pos_hard.svg",
            "ang_easy.svg",
            "ang_medium.svg",
            "ang_hard.svg",
            "episodes.csv",
            "summary.csv",
            "series_easy.csv",
            "qualitative_ordering.txt",
        ] {
            assert!(reports.join(name).exists(), "missing {name}");
        }
        let episodes = std::fs::read_to_string(reports.join("episodes.csv")).unwrap();
        assert_eq!(episodes.lines().count(), 1 + 48);
        assert!(episodes.starts_with(EPISODES_CSV_HEADER));
    }

    #[test]
    fn missing_checkpoints_are_reported_with_nonzero_outcome() {
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().join("runs");
        train(&tiny_run("naive"), 0, &runs.join("naive/0"), Timing::None).unwrap();
        // An empty seed directory for another preset: cell must be skipped.
        std::fs::create_dir_all(runs.join("large_dr/0")).unwrap();
        let err = run_matrix(&runs, &dir.path().join("reports"), &ScenarioName::ALL, 2).unwrap_err();
        let missing = err.downcast_ref::<MissingArtifacts>().expect("typed error");
        assert!(missing.0.iter().any(|s| s.contains("large_dr/0")), "{missing}");
        // The naive cell was still evaluated.
        assert!(runs.join("naive/0/eval/easy.csv").exists());
    }

    #[test]
    fn empty_scenario_list_is_a_successful_empty_report() {
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().join("runs");
        std::fs::create_dir_all(&runs).unwrap();
        let reports = dir.path().join("reports");
        let report = run_matrix(&runs, &reports, &[], 20).unwrap();
        assert_eq!(report.episode_records, 0);
        assert!(report.skipped_cells.is_empty());
        let episodes = std::fs::read_to_string(reports.join("episodes.csv")).unwrap();
        assert_eq!(episodes, format!("{EPISODES_CSV_HEADER}\n"));
    }

    #[test]
    fn empty_runs_dir_reports_all_presets_missing() {
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().join("runs");
        std::fs::create_dir_all(&runs).unwrap();
        let err = run_matrix(&runs, &dir.path().join("reports"), &ScenarioName::ALL, 2).unwrap_err();
        let missing = err.downcast_ref::<MissingArtifacts>().unwrap();
        assert_eq!(missing.0.len(), 4);
    }
}
