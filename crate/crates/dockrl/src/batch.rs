//! Data-parallel environment lanes and rollout collection.
//!
//! Every lane owns two ChaCha streams derived from the global seed — one
//! for the environment (reset sampling, payload draws) and one for action
//! noise — so the collected batch is bit-identical regardless of the rayon
//! thread count. Lane results are merged in lane order.

use dockrl_core::actuation::ActionCommand;
use dockrl_core::envdock::{DockingConfig, DockingEnv, DomainRandomization, VehicleModel, ACTION_LEN};
use dockrl_core::learner::{normalize_observation, sample_from_mean, PolicyParams, RolloutBatch};
use dockrl_core::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;

/// Stream id for the learner's minibatch shuffling.
pub const UPDATE_STREAM: u64 = 0;

fn env_stream(lane: usize) -> u64 {
    1 + 2 * lane as u64
}

fn sampler_stream(lane: usize) -> u64 {
    2 + 2 * lane as u64
}

fn lane_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn update_rng(seed: u64) -> ChaCha8Rng {
    lane_rng(seed, UPDATE_STREAM)
}

struct Lane {
    env: DockingEnv,
    sampler: ChaCha8Rng,
    /// Normalized observation the policy will act on next.
    obs: Vec<f64>,
    episode_return: f64,
}

/// Per-iteration rollout summary.
#[derive(Debug, Clone, Default)]
pub struct CollectStats {
    /// Returns of episodes that finished during this collection.
    pub completed_returns: Vec<f64>,
    pub faults: usize,
}

/// A fixed set of environment lanes stepped in parallel.
pub struct VecDockEnv {
    lanes: Vec<Lane>,
    obs_dim: usize,
}

impl VecDockEnv {
    pub fn new(
        vehicle: VehicleModel,
        cfg: DockingConfig,
        dr: DomainRandomization,
        num_envs: usize,
        seed: u64,
    ) -> Self {
        let obs_dim = dockrl_core::envdock::FRAME_LEN * cfg.history_len;
        let lanes = (0..num_envs)
            .map(|lane| {
                let mut env =
                    DockingEnv::new(vehicle, cfg, dr, lane_rng(seed, env_stream(lane)));
                let mut obs = env.reset().values().to_vec();
                normalize_observation(&mut obs);
                Lane {
                    env,
                    sampler: lane_rng(seed, sampler_stream(lane)),
                    obs,
                    episode_return: 0.0,
                }
            })
            .collect();
        Self { lanes, obs_dim }
    }

    pub fn num_envs(&self) -> usize {
        self.lanes.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Roll every lane forward `steps` steps under the stochastic policy,
    /// filling a fresh batch (including bootstrap values of the final
    /// states). Lanes auto-reset at episode boundaries.
    pub fn collect(&mut self, params: &PolicyParams, steps: usize) -> (RolloutBatch, CollectStats) {
        let obs_dim = self.obs_dim;
        let num_envs = self.lanes.len();
        let mut batch = RolloutBatch::new(num_envs, steps, obs_dim, ACTION_LEN);

        struct LaneOut {
            obs: Vec<f64>,
            actions: Vec<f64>,
            log_probs: Vec<f64>,
            rewards: Vec<f64>,
            values: Vec<f64>,
            dones: Vec<bool>,
            bootstrap: f64,
            completed: Vec<f64>,
            faults: usize,
        }

        let outs: Vec<LaneOut> = self
            .lanes
            .par_iter_mut()
            .map(|lane| {
                let mut actor_ws = params.actor.workspace();
                let mut critic_ws = params.critic.workspace();
                let mut out = LaneOut {
                    obs: Vec::with_capacity(steps * obs_dim),
                    actions: Vec::with_capacity(steps * ACTION_LEN),
                    log_probs: Vec::with_capacity(steps),
                    rewards: Vec::with_capacity(steps),
                    values: Vec::with_capacity(steps),
                    dones: Vec::with_capacity(steps),
                    bootstrap: 0.0,
                    completed: Vec::new(),
                    faults: 0,
                };
                for _ in 0..steps {
                    let mean = params.actor.forward(&lane.obs, &mut actor_ws).to_vec();
                    let value = params.critic.forward(&lane.obs, &mut critic_ws)[0];
                    let (action, log_prob) =
                        sample_from_mean(&mean, &params.log_std, &mut lane.sampler);

                    out.obs.extend_from_slice(&lane.obs);
                    out.actions.extend_from_slice(&action);
                    out.log_probs.push(log_prob);
                    out.values.push(value);

                    let mut cmd = [0.0; ACTION_LEN];
                    cmd.copy_from_slice(&action);
                    let result = lane.env.step(&ActionCommand(cmd));
                    lane.episode_return += result.reward;
                    out.rewards.push(result.reward);
                    out.dones.push(result.terminated);
                    if result.info.fault {
                        out.faults += 1;
                    }
                    if result.terminated {
                        out.completed.push(lane.episode_return);
                        lane.episode_return = 0.0;
                        lane.obs = lane.env.reset().values().to_vec();
                    } else {
                        lane.obs = result.observation.values().to_vec();
                    }
                    normalize_observation(&mut lane.obs);
                }
                out.bootstrap = params.critic.forward(&lane.obs, &mut critic_ws)[0];
                out
            })
            .collect();

        let mut stats = CollectStats::default();
        for (lane, out) in outs.into_iter().enumerate() {
            let base = lane * steps;
            batch.obs[base * obs_dim..(base + steps) * obs_dim].copy_from_slice(&out.obs);
            batch.actions[base * ACTION_LEN..(base + steps) * ACTION_LEN]
                .copy_from_slice(&out.actions);
            batch.log_probs[base..base + steps].copy_from_slice(&out.log_probs);
            batch.rewards[base..base + steps].copy_from_slice(&out.rewards);
            batch.values[base..base + steps].copy_from_slice(&out.values);
            batch.dones[base..base + steps].copy_from_slice(&out.dones);
            batch.bootstrap_values[lane] = out.bootstrap;
            stats.completed_returns.extend_from_slice(&out.completed);
            stats.faults += out.faults;
        }
        (batch, stats)
    }
}
