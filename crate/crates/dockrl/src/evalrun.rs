//! Deterministic policy evaluation under the payload scenarios.
//!
//! Evaluation episodes use the action mean (no sampling) with domain
//! randomization off and the scenario payload composed at reset. Start
//! positions derive from the training seed and scenario only, so every
//! policy trained with the same seed sees the same episode sequence —
//! paired comparisons across configurations come for free.

use crate::checkpoint::Checkpoint;
use crate::config::{EvalScenario, RunConfig};
use anyhow::{bail, Result};
use dockrl_core::actuation::ActionCommand;
use dockrl_core::envdock::{DockingEnv, DomainRandomization, ACTION_LEN, FRAME_LEN};
use dockrl_core::learner::normalize_observation;
use dockrl_core::ChaCha8Rng;
use rand::SeedableRng;
use std::fmt::Write as _;
use std::path::Path;

pub const EVAL_CSV_HEADER: &str = "episode,step,time_s,pos_err_m,ang_err_rad";
pub const SUMMARY_CSV_HEADER: &str = "config,seed,scenario,median_final_pos_err_m,mean_final_pos_err_m,median_final_ang_err_rad,success_rate";

/// Salt mixed into the training seed for evaluation streams.
const EVAL_SEED_SALT: u64 = 0x6404_EA11;

/// Per-step error series for one episode.
#[derive(Debug, Clone)]
pub struct EpisodeSeries {
    pub pos_err: Vec<f64>,
    pub ang_err: Vec<f64>,
    pub ret: f64,
    pub success: bool,
    pub fault: bool,
}

impl EpisodeSeries {
    pub fn final_pos_err(&self) -> f64 {
        *self.pos_err.last().expect("non-empty episode")
    }

    pub fn final_ang_err(&self) -> f64 {
        *self.ang_err.last().expect("non-empty episode")
    }
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub episodes: Vec<EpisodeSeries>,
    pub dt: f64,
}

impl EvalResult {
    pub fn median_final_pos_err(&self) -> f64 {
        median(self.episodes.iter().map(EpisodeSeries::final_pos_err))
    }

    pub fn mean_final_pos_err(&self) -> f64 {
        let n = self.episodes.len() as f64;
        self.episodes.iter().map(EpisodeSeries::final_pos_err).sum::<f64>() / n
    }

    pub fn median_final_ang_err(&self) -> f64 {
        median(self.episodes.iter().map(EpisodeSeries::final_ang_err))
    }

    pub fn success_rate(&self) -> f64 {
        let n = self.episodes.len() as f64;
        self.episodes.iter().filter(|e| e.success).count() as f64 / n
    }

    pub fn mean_return(&self) -> f64 {
        let n = self.episodes.len() as f64;
        self.episodes.iter().map(|e| e.ret).sum::<f64>() / n
    }

    /// Render the per-step series CSV (`episode,step,time_s,...`).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(EVAL_CSV_HEADER);
        out.push('\n');
        for (episode, series) in self.episodes.iter().enumerate() {
            for (i, (p, a)) in series.pos_err.iter().zip(&series.ang_err).enumerate() {
                let step = i + 1;
                let time_s = step as f64 * self.dt;
                let _ = writeln!(out, "{episode},{step},{time_s},{p},{a}");
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// One summary row under [`SUMMARY_CSV_HEADER`].
    pub fn summary_row(&self, config: &str, seed: u64, scenario: &str) -> String {
        format!(
            "{config},{seed},{scenario},{},{},{},{}",
            self.median_final_pos_err(),
            self.mean_final_pos_err(),
            self.median_final_ang_err(),
            self.success_rate()
        )
    }
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    assert!(!v.is_empty());
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// RNG for one evaluation episode: seeded from the training seed, streamed
/// by scenario and episode so episode k is identical no matter how many
/// episodes run or in what order.
fn episode_rng(train_seed: u64, scenario_index: usize, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(train_seed ^ EVAL_SEED_SALT);
    rng.set_stream((scenario_index as u64) * 1_000_000 + episode as u64);
    rng
}

/// Run `scenario.episodes` deterministic episodes of the checkpointed
/// policy and collect the error series.
pub fn evaluate(
    ckpt: &Checkpoint,
    run: &RunConfig,
    scenario: &EvalScenario,
) -> Result<EvalResult> {
    let mut cfg = run.docking_config();
    cfg.history_len = ckpt.history_len as usize;
    if ckpt.obs_dim() != FRAME_LEN * cfg.history_len {
        bail!(
            "checkpoint expects observation width {} but history length {} gives {}",
            ckpt.obs_dim(),
            cfg.history_len,
            FRAME_LEN * cfg.history_len
        );
    }
    let vehicle = run.vehicle_model();
    let params = &ckpt.params;

    let mut actor_ws = params.actor.workspace();
    let mut episodes = Vec::with_capacity(scenario.episodes);
    for episode in 0..scenario.episodes {
        let rng = episode_rng(ckpt.train_seed, scenario.name.index(), episode);
        let mut env = DockingEnv::new(vehicle, cfg, DomainRandomization::disabled(), rng);
        let mut obs = env.reset_with_payload(scenario.payload).values().to_vec();
        let mut series = EpisodeSeries {
            pos_err: Vec::with_capacity(cfg.episode_len as usize),
            ang_err: Vec::with_capacity(cfg.episode_len as usize),
            ret: 0.0,
            success: false,
            fault: false,
        };
        loop {
            normalize_observation(&mut obs);
            let mean = params.actor.forward(&obs, &mut actor_ws);
            let mut cmd = [0.0; ACTION_LEN];
            cmd.copy_from_slice(mean);
            let result = env.step(&ActionCommand(cmd));
            series.pos_err.push(result.info.pos_err);
            series.ang_err.push(result.info.ang_err);
            series.ret += result.reward;
            if result.terminated {
                series.success = result.info.success;
                series.fault = result.info.fault;
                break;
            }
            obs = result.observation.values().to_vec();
        }
        episodes.push(series);
    }
    Ok(EvalResult {
        episodes,
        dt: cfg.dt,
    })
}
