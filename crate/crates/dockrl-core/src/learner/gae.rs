//! On-policy rollout storage and generalized advantage estimation.

use alloc::vec;
use alloc::vec::Vec;

/// Rectangular rollout buffer: `num_envs` lanes of `steps` transitions,
/// stored lane-major so each lane's trajectory is contiguous.
///
/// Observations are stored as fed to the networks (already normalized);
/// actions are the pre-clamp Gaussian samples whose log density is in
/// `log_probs`.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    pub num_envs: usize,
    pub steps: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    /// Value estimate of the state after the final stored step, per lane.
    pub bootstrap_values: Vec<f64>,
}

impl RolloutBatch {
    pub fn new(num_envs: usize, steps: usize, obs_dim: usize, act_dim: usize) -> Self {
        let n = num_envs * steps;
        Self {
            num_envs,
            steps,
            obs_dim,
            act_dim,
            obs: vec![0.0; n * obs_dim],
            actions: vec![0.0; n * act_dim],
            log_probs: vec![0.0; n],
            rewards: vec![0.0; n],
            values: vec![0.0; n],
            dones: vec![false; n],
            bootstrap_values: vec![0.0; num_envs],
        }
    }

    pub fn len(&self) -> usize {
        self.num_envs * self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat sample index of (lane, step).
    pub fn index(&self, lane: usize, step: usize) -> usize {
        debug_assert!(lane < self.num_envs && step < self.steps);
        lane * self.steps + step
    }

    pub fn obs_slice(&self, sample: usize) -> &[f64] {
        &self.obs[sample * self.obs_dim..(sample + 1) * self.obs_dim]
    }

    pub fn obs_slice_mut(&mut self, sample: usize) -> &mut [f64] {
        let d = self.obs_dim;
        &mut self.obs[sample * d..(sample + 1) * d]
    }

    pub fn action_slice(&self, sample: usize) -> &[f64] {
        &self.actions[sample * self.act_dim..(sample + 1) * self.act_dim]
    }

    pub fn action_slice_mut(&mut self, sample: usize) -> &mut [f64] {
        let d = self.act_dim;
        &mut self.actions[sample * d..(sample + 1) * d]
    }
}

/// Generalized advantage estimation over the batch.
///
/// Per lane, sweeping backwards with `nt = 1 - done_t`:
///
/// ```text
/// delta_t = r_t + gamma * V_{t+1} * nt - V_t
/// A_t     = delta_t + gamma * lambda * nt * A_{t+1}
/// ```
///
/// The value after the last stored step comes from `bootstrap_values`.
/// Returns raw (advantages, returns = advantages + values); normalization
/// is applied separately per update.
pub fn compute_gae(batch: &RolloutBatch, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let mut advantages = vec![0.0; batch.len()];
    let mut returns = vec![0.0; batch.len()];
    for lane in 0..batch.num_envs {
        let mut acc = 0.0;
        for step in (0..batch.steps).rev() {
            let s = batch.index(lane, step);
            let nonterminal = if batch.dones[s] { 0.0 } else { 1.0 };
            let next_value = if step + 1 == batch.steps {
                batch.bootstrap_values[lane]
            } else {
                batch.values[batch.index(lane, step + 1)]
            };
            let delta = batch.rewards[s] + gamma * next_value * nonterminal - batch.values[s];
            acc = delta + gamma * lambda * nonterminal * acc;
            advantages[s] = acc;
            returns[s] = acc + batch.values[s];
        }
    }
    (advantages, returns)
}

/// Shift and scale to zero mean, unit variance (epsilon 1e-8).
pub fn normalize_advantages(advantages: &mut [f64]) {
    if advantages.is_empty() {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let scale = 1.0 / (libm::sqrt(var) + 1e-8);
    for a in advantages {
        *a = (*a - mean) * scale;
    }
}
