//! The training loop: collect, estimate advantages, update, log, checkpoint.

use crate::batch::{update_rng, VecDockEnv};
use crate::checkpoint::{Checkpoint, RngState};
use crate::config::RunConfig;
use anyhow::{Context, Result};
use dockrl_core::learner::{grad_sums, ppo_update_with, AdamState, LearnerError, PolicyParams};
use rayon::prelude::*;
use std::collections::VecDeque;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const TRAIN_LOG_HEADER: &str =
    "iteration,mean_return,actor_loss,critic_loss,clip_frac,kl_proxy,wall_s";

/// Wall-clock column policy. `None` writes 0.0 so that fixed seeds yield
/// byte-identical logs; `Wall` records real elapsed seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Timing {
    #[default]
    Wall,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainOutcome {
    Completed,
    /// Training hit a non-finite loss; the last good checkpoint is kept.
    Diverged { iteration: usize, detail: String },
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub outcome: TrainOutcome,
    pub final_checkpoint: PathBuf,
    pub log_path: PathBuf,
}

/// Train one seed of a run configuration into `out_dir`.
///
/// Layout: `out_dir/{resolved_config.toml, train_log.csv, checkpoints/}`.
/// Checkpoints land every `train.checkpoint_every` iterations and at
/// completion (`final.ckpt`). On divergence the last finished iteration's
/// parameters are saved instead and the outcome reports the failure.
pub fn train(
    run: &RunConfig,
    seed: u64,
    out_dir: &Path,
    timing: Timing,
) -> Result<TrainArtifacts> {
    run.validate()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::write(out_dir.join("resolved_config.toml"), run.to_toml())?;
    let ckpt_dir = out_dir.join("checkpoints");
    std::fs::create_dir_all(&ckpt_dir)?;
    let log_path = out_dir.join("train_log.csv");

    let cfg = run.ppo_config();
    let config_hash = run.hash();
    let mut rng = update_rng(seed);
    let mut params = PolicyParams::new(run.obs_dim(), 8, &run.train.hidden_layers, &mut rng);
    let mut adam = AdamState::new(params.flat_len());
    let mut venv = VecDockEnv::new(
        run.vehicle_model(),
        run.docking_config(),
        run.domain_randomization(),
        cfg.num_envs,
        seed,
    );

    let mut log = std::io::BufWriter::new(std::fs::File::create(&log_path)?);
    writeln!(log, "{TRAIN_LOG_HEADER}")?;

    let checkpoint = |params: &PolicyParams, rng: &RngState, iteration: usize, name: &str| {
        let ckpt = Checkpoint {
            config_hash,
            train_seed: seed,
            iteration: iteration as u32,
            history_len: run.env.history_len as u32,
            params: params.clone(),
            rng: rng.clone(),
        };
        ckpt.save(&ckpt_dir.join(name))
    };

    let start = Instant::now();
    let mut recent_returns: VecDeque<f64> = VecDeque::with_capacity(100);
    let mut return_history: Vec<f64> = Vec::with_capacity(cfg.iterations);
    let mut outcome = TrainOutcome::Completed;

    for iteration in 0..cfg.iterations {
        let (batch, stats) = venv.collect(&params, cfg.rollout_len);
        for r in &stats.completed_returns {
            if recent_returns.len() == 100 {
                recent_returns.pop_front();
            }
            recent_returns.push_back(*r);
        }

        let lr = cfg.lr_at(iteration);
        let update = ppo_update_with(
            &mut params,
            &mut adam,
            &mut rng,
            &batch,
            &cfg,
            lr,
            |p, ctx, chunks| {
                chunks
                    .par_iter()
                    .map(|c| grad_sums(p, ctx, c, &cfg))
                    .collect()
            },
        );
        let update = match update {
            Ok(u) => u,
            Err(err @ LearnerError::NonFiniteLoss { .. }) => {
                checkpoint(&params, &RngState::capture(&rng), iteration, "last_good.ckpt")?;
                outcome = TrainOutcome::Diverged {
                    iteration,
                    detail: err.to_string(),
                };
                break;
            }
            Err(err) => return Err(err.into()),
        };

        let mean_return = if recent_returns.is_empty() {
            0.0
        } else {
            recent_returns.iter().sum::<f64>() / recent_returns.len() as f64
        };
        return_history.push(mean_return);
        let wall_s = match timing {
            Timing::Wall => start.elapsed().as_secs_f64(),
            Timing::None => 0.0,
        };
        writeln!(
            log,
            "{},{},{},{},{},{},{}",
            iteration,
            mean_return,
            update.actor_loss,
            update.critic_loss,
            update.clip_fraction,
            update.kl_proxy,
            wall_s
        )?;
        log.flush()?;
        if (iteration + 1) % 10 == 0 || iteration + 1 == cfg.iterations {
            eprintln!(
                "[{} seed {seed}] iter {}/{} mean_return {mean_return:.3} clip {:.3}",
                run.name,
                iteration + 1,
                cfg.iterations,
                update.clip_fraction
            );
        }

        let done_after = iteration + 1;
        if done_after % run.train.checkpoint_every == 0 && done_after < cfg.iterations {
            checkpoint(
                &params,
                &RngState::capture(&rng),
                done_after,
                &format!("iter_{done_after:06}.ckpt"),
            )?;
        }
    }

    if matches!(outcome, TrainOutcome::Completed) {
        checkpoint(
            &params,
            &RngState::capture(&rng),
            cfg.iterations,
            "final.ckpt",
        )?;
        // Soft convergence check for full-budget runs: the return at 60%
        // of the budget should already sit within 10% of the final one.
        if cfg.iterations >= 500 {
            let mid = return_history[cfg.iterations * 3 / 5 - 1];
            let last = return_history[cfg.iterations - 1];
            let within = (mid - last).abs() <= 0.1 * last.abs().max(1e-9);
            eprintln!(
                "[{} seed {seed}] convergence check (soft): return at iteration {} is {mid:.2} \
                 vs final {last:.2} -> {}",
                run.name,
                cfg.iterations * 3 / 5,
                if within { "within 10%" } else { "outside 10%" }
            );
        }
    }

    log.flush()?;
    drop(log);

    Ok(TrainArtifacts {
        outcome,
        final_checkpoint: ckpt_dir.join("final.ckpt"),
        log_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scale;

    fn tiny_run() -> RunConfig {
        RunConfig::parse(
            r#"
            preset = "naive"
            [ppo]
            num_envs = 4
            iterations = 2
            rollout_len = 8
            minibatches = 2
            epochs = 2
            [env]
            episode_len = 10
            [train]
            hidden_layers = [8]
            checkpoint_every = 1
            "#,
            Scale::Paper,
        )
        .unwrap()
    }

    #[test]
    fn zero_iterations_emit_header_and_initial_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = tiny_run();
        run.ppo.iterations = 0;
        let artifacts = train(&run, 0, dir.path(), Timing::None).unwrap();
        assert_eq!(artifacts.outcome, TrainOutcome::Completed);
        let log = std::fs::read_to_string(&artifacts.log_path).unwrap();
        assert_eq!(log, format!("{TRAIN_LOG_HEADER}\n"));
        let ckpt = Checkpoint::load(&artifacts.final_checkpoint).unwrap();
        assert_eq!(ckpt.iteration, 0);
        assert_eq!(ckpt.history_len, 1);
    }

    #[test]
    fn training_runs_write_logs_and_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let run = tiny_run();
        let artifacts = train(&run, 1, dir.path(), Timing::None).unwrap();
        let log = std::fs::read_to_string(&artifacts.log_path).unwrap();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], TRAIN_LOG_HEADER);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].starts_with("1,"));
        assert!(dir.path().join("checkpoints/iter_000001.ckpt").exists());
        assert!(artifacts.final_checkpoint.exists());
        assert!(dir.path().join("resolved_config.toml").exists());
    }

    #[test]
    fn fixed_seed_runs_are_byte_identical() {
        let run = tiny_run();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = train(&run, 0, dir_a.path(), Timing::None).unwrap();
        let b = train(&run, 0, dir_b.path(), Timing::None).unwrap();
        let log_a = std::fs::read(&a.log_path).unwrap();
        let log_b = std::fs::read(&b.log_path).unwrap();
        assert_eq!(log_a, log_b);
        let ckpt_a = std::fs::read(&a.final_checkpoint).unwrap();
        let ckpt_b = std::fs::read(&b.final_checkpoint).unwrap();
        assert_eq!(ckpt_a, ckpt_b);
    }

    #[test]
    fn divergence_keeps_the_last_good_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = tiny_run();
        // A near-overflow value coefficient drives the critic gradients to
        // infinity; the resulting NaN parameters must abort cleanly.
        run.ppo.value_coef = 1e308;
        run.ppo.max_grad_norm = 1e300;
        run.ppo.iterations = 30;
        let artifacts = train(&run, 0, dir.path(), Timing::None).unwrap();
        match artifacts.outcome {
            TrainOutcome::Diverged { .. } => {
                assert!(dir.path().join("checkpoints/last_good.ckpt").exists());
                assert!(!artifacts.final_checkpoint.exists());
            }
            TrainOutcome::Completed => {
                panic!("expected divergence under value_coef=1e308");
            }
        }
    }
}
