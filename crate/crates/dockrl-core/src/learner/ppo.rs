//! Clipped-surrogate PPO update with hand-derived gradients and an Adam
//! optimizer over the flat parameter vector.
//!
//! The per-minibatch gradient work is split into a fixed number of index
//! chunks whose partial sums are reduced in chunk order. The chunk layout
//! depends only on the configuration, never on how the chunks are executed,
//! so a parallel executor produces bit-identical results to the serial one.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::gae::{compute_gae, normalize_advantages, RolloutBatch};
use super::mlp::{gaussian_entropy, gaussian_log_prob, PolicyParams};

/// PPO hyperparameters plus the rollout geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoConfig {
    pub clip_ratio: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub learning_rate: f64,
    /// Linearly anneal the learning rate to zero over `iterations`.
    pub lr_decay: bool,
    pub epochs: usize,
    pub minibatches: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub rollout_len: usize,
    pub num_envs: usize,
    pub iterations: usize,
    /// Fixed gradient-accumulation chunk count per minibatch.
    pub grad_chunks: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_ratio: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            learning_rate: 3e-4,
            lr_decay: true,
            epochs: 5,
            minibatches: 4,
            value_coef: 0.5,
            entropy_coef: 0.0,
            max_grad_norm: 1.0,
            rollout_len: 32,
            num_envs: 2048,
            iterations: 500,
            grad_chunks: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnerError {
    InvalidConfig(String),
    /// The loss or a parameter went NaN/Inf; the iteration is aborted.
    NonFiniteLoss {
        epoch: usize,
        minibatch: usize,
    },
}

impl core::fmt::Display for LearnerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::InvalidConfig(msg) => write!(f, "invalid learner config: {msg}"),
            Self::NonFiniteLoss { epoch, minibatch } => write!(
                f,
                "non-finite loss in epoch {epoch}, minibatch {minibatch}; training diverged"
            ),
        }
    }
}

impl core::error::Error for LearnerError {}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |msg: String| Err(LearnerError::InvalidConfig(msg));
        if !(self.clip_ratio > 0.0 && self.clip_ratio < 1.0) {
            return bad(format!("clip_ratio {} not in (0, 1)", self.clip_ratio));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} not in (0, 1]", self.gamma));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad(format!("gae_lambda {} not in (0, 1]", self.gae_lambda));
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.epochs == 0 || self.minibatches == 0 || self.grad_chunks == 0 {
            return bad("epochs, minibatches, and grad_chunks must be at least 1".into());
        }
        if self.rollout_len == 0 || self.num_envs == 0 {
            return bad("rollout_len and num_envs must be at least 1".into());
        }
        if self.num_envs * self.rollout_len < self.minibatches {
            return bad("batch smaller than the minibatch count".into());
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0 && self.max_grad_norm > 0.0) {
            return bad("loss coefficients must be non-negative, grad norm positive".into());
        }
        Ok(())
    }

    /// Learning rate at a given iteration under the linear schedule.
    pub fn lr_at(&self, iteration: usize) -> f64 {
        if self.lr_decay && self.iterations > 0 {
            let frac = 1.0 - iteration as f64 / self.iterations as f64;
            self.learning_rate * frac.max(1.0 / self.iterations as f64)
        } else {
            self.learning_rate
        }
    }
}

/// Adam over the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    fn step(&mut self, theta: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let b1t = 1.0 - libm::pow(self.beta1, self.t as f64);
        let b2t = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..theta.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            theta[i] -= lr * m_hat / (libm::sqrt(v_hat) + self.eps);
        }
    }
}

/// Shared references for gradient evaluation.
pub struct BatchContext<'a> {
    pub batch: &'a RolloutBatch,
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

/// Unreduced per-chunk gradient and statistic sums.
#[derive(Debug, Clone)]
pub struct GradSums {
    pub grads: Vec<f64>,
    pub count: usize,
    pub surrogate: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub clipped: usize,
}

impl GradSums {
    fn zeros(len: usize) -> Self {
        Self {
            grads: vec![0.0; len],
            count: 0,
            surrogate: 0.0,
            value_loss: 0.0,
            kl: 0.0,
            clipped: 0,
        }
    }

    fn absorb(&mut self, other: &GradSums) {
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            *a += b;
        }
        self.count += other.count;
        self.surrogate += other.surrogate;
        self.value_loss += other.value_loss;
        self.kl += other.kl;
        self.clipped += other.clipped;
    }
}

/// Loss and gradient sums over one index chunk.
///
/// Loss per sample: `-min(rho A, clip(rho) A) + c_v (V - ret)^2 - c_e H`.
/// Gradients flow through the unclipped branch only when it is not beaten
/// by the clipped one, through the critic head, and into the log-std both
/// from the density and the entropy bonus.
pub fn grad_sums(
    params: &PolicyParams,
    ctx: &BatchContext<'_>,
    idx: &[usize],
    cfg: &PpoConfig,
) -> GradSums {
    let mut out = GradSums::zeros(params.flat_len());
    let mut actor_ws = params.actor.workspace();
    let mut critic_ws = params.critic.workspace();
    let act_dim = params.act_dim();
    let mut d_mean = vec![0.0; act_dim];
    let actor_off = params.actor_offset();
    let critic_off = params.critic_offset();
    let log_std_off = params.log_std_offset();
    let actor_len = params.actor.param_len();
    let critic_len = params.critic.param_len();

    for &s in idx {
        let obs = ctx.batch.obs_slice(s);
        let action = ctx.batch.action_slice(s);
        let advantage = ctx.advantages[s];

        let mean = params.actor.forward(obs, &mut actor_ws).to_vec();
        let value = params.critic.forward(obs, &mut critic_ws)[0];

        let log_prob = gaussian_log_prob(&mean, &params.log_std, action);
        let ratio = libm::exp(log_prob - ctx.batch.log_probs[s]);
        let unclipped = ratio * advantage;
        let clipped_ratio = ratio.clamp(1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        let clipped = clipped_ratio * advantage;
        out.surrogate += unclipped.min(clipped);
        if (ratio - 1.0).abs() > cfg.clip_ratio {
            out.clipped += 1;
        }
        out.kl += ctx.batch.log_probs[s] - log_prob;

        // d(-surrogate)/d(log_prob): active only on the unclipped branch.
        let d_log_prob = if clipped < unclipped {
            0.0
        } else {
            -unclipped
        };
        if d_log_prob != 0.0 {
            for j in 0..act_dim {
                let inv_var = libm::exp(-2.0 * params.log_std[j]);
                let diff = action[j] - mean[j];
                d_mean[j] = d_log_prob * diff * inv_var;
                let z2 = diff * diff * inv_var;
                out.grads[log_std_off + j] += d_log_prob * (z2 - 1.0);
            }
            params.actor.backward(
                &mut actor_ws,
                &d_mean,
                &mut out.grads[actor_off..actor_off + actor_len],
            );
        }

        // Value regression term.
        let v_err = value - ctx.returns[s];
        out.value_loss += v_err * v_err;
        let d_value = [cfg.value_coef * 2.0 * v_err];
        params.critic.backward(
            &mut critic_ws,
            &d_value,
            &mut out.grads[critic_off..critic_off + critic_len],
        );

        // Entropy bonus: dH/d(log_std_j) = 1.
        if cfg.entropy_coef != 0.0 {
            for j in 0..act_dim {
                out.grads[log_std_off + j] -= cfg.entropy_coef;
            }
        }
        out.count += 1;
    }
    out
}

/// Per-update diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    /// Mean negated surrogate (the actor objective being minimized).
    pub actor_loss: f64,
    /// Mean squared value error.
    pub critic_loss: f64,
    /// Mean of `log_prob_old - log_prob_new` over the update.
    pub kl_proxy: f64,
    /// Fraction of samples with the ratio outside the clip band.
    pub clip_fraction: f64,
    pub entropy: f64,
}

/// One PPO update with a caller-supplied chunk executor.
///
/// `run_chunks` receives the minibatch split into `cfg.grad_chunks` index
/// chunks and must return one [`GradSums`] per chunk, in order; it may
/// evaluate them in parallel. Reduction order is fixed here.
pub fn ppo_update_with<F>(
    params: &mut PolicyParams,
    adam: &mut AdamState,
    rng: &mut ChaCha8Rng,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    lr: f64,
    mut run_chunks: F,
) -> Result<UpdateStats, LearnerError>
where
    F: FnMut(&PolicyParams, &BatchContext<'_>, &[&[usize]]) -> Vec<GradSums>,
{
    let (mut advantages, returns) = compute_gae(batch, cfg.gamma, cfg.gae_lambda);
    normalize_advantages(&mut advantages);
    let ctx = BatchContext {
        batch,
        advantages: &advantages,
        returns: &returns,
    };

    let total = batch.len();
    let mut order: Vec<usize> = (0..total).collect();
    let mb_size = total / cfg.minibatches;
    let entropy = gaussian_entropy(&params.log_std);

    let mut stats = UpdateStats::default();
    let mut minibatch_count = 0usize;
    let mut sample_count = 0usize;
    let mut clipped_count = 0usize;

    let mut theta = params.flatten();
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        for mb in 0..cfg.minibatches {
            let start = mb * mb_size;
            let end = if mb + 1 == cfg.minibatches {
                total
            } else {
                start + mb_size
            };
            let idx = &order[start..end];
            let chunks: Vec<&[usize]> = split_chunks(idx, cfg.grad_chunks);
            let partials = run_chunks(params, &ctx, &chunks);

            let mut sums = GradSums::zeros(params.flat_len());
            for p in &partials {
                sums.absorb(p);
            }
            let n = sums.count as f64;
            let actor_loss = -sums.surrogate / n;
            let critic_loss = sums.value_loss / n;
            let loss = actor_loss + cfg.value_coef * critic_loss - cfg.entropy_coef * entropy;
            if !loss.is_finite() {
                return Err(LearnerError::NonFiniteLoss { epoch, minibatch: mb });
            }

            for g in &mut sums.grads {
                *g /= n;
            }
            clip_grad_norm(&mut sums.grads, cfg.max_grad_norm);
            adam.step(&mut theta, &sums.grads, lr);
            params.assign_from_flat(&theta);
            // Keep theta in sync with the clamp applied during assignment.
            let off = params.log_std_offset();
            theta[off..].copy_from_slice(&params.log_std);
            if theta.iter().any(|p| !p.is_finite()) {
                return Err(LearnerError::NonFiniteLoss { epoch, minibatch: mb });
            }

            stats.actor_loss += actor_loss;
            stats.critic_loss += critic_loss;
            stats.kl_proxy += sums.kl;
            clipped_count += sums.clipped;
            sample_count += sums.count;
            minibatch_count += 1;
        }
    }

    stats.actor_loss /= minibatch_count as f64;
    stats.critic_loss /= minibatch_count as f64;
    stats.kl_proxy /= sample_count as f64;
    stats.clip_fraction = clipped_count as f64 / sample_count as f64;
    stats.entropy = entropy;
    Ok(stats)
}

/// One PPO update executed serially (the reference path).
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut AdamState,
    rng: &mut ChaCha8Rng,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    lr: f64,
) -> Result<UpdateStats, LearnerError> {
    ppo_update_with(params, adam, rng, batch, cfg, lr, |p, ctx, chunks| {
        chunks.iter().map(|c| grad_sums(p, ctx, c, cfg)).collect()
    })
}

/// Split an index slice into `n` contiguous chunks (the first `len % n`
/// chunks get one extra element). Empty chunks are dropped.
fn split_chunks(idx: &[usize], n: usize) -> Vec<&[usize]> {
    let n = n.min(idx.len()).max(1);
    let base = idx.len() / n;
    let extra = idx.len() % n;
    let mut out = Vec::with_capacity(n);
    let mut pos = 0;
    for c in 0..n {
        let size = base + usize::from(c < extra);
        if size == 0 {
            continue;
        }
        out.push(&idx[pos..pos + size]);
        pos += size;
    }
    out
}

fn clip_grad_norm(grads: &mut [f64], max_norm: f64) {
    let norm = libm::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grads {
            *g *= scale;
        }
    }
}
