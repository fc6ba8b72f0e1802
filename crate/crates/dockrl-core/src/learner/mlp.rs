//! Fixed-architecture MLP with hand-derived reverse-mode gradients.
//!
//! Layers are dense with tanh activations on every hidden layer and a
//! linear output head. Gradients are accumulated into flat buffers whose
//! layout matches [`PolicyParams::flatten`], so the optimizer and the
//! checkpoint format share one canonical parameter order: actor layers
//! (weights then biases, input to output), critic layers, log-std tail.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::envdock::FRAME_LEN;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// One dense layer; weights are row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn new(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        // Xavier-uniform keeps tanh activations in range at init.
        let limit = libm::sqrt(6.0 / (in_dim + out_dim) as f64);
        let w = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            in_dim,
            out_dim,
            w,
            b: vec![0.0; out_dim],
        }
    }

    fn param_len(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

/// A stack of dense layers: tanh on all but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Reusable activation storage for one forward/backward pass.
/// `acts[0]` is the input; `acts[k + 1]` is layer k's output
/// (post-activation for hidden layers).
#[derive(Debug, Clone)]
pub struct MlpWorkspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_next: Vec<f64>,
}

impl Mlp {
    /// Build from the full dimension chain (input, hidden..., output).
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output dims");
        let layers = dims
            .windows(2)
            .map(|w| Dense::new(w[0], w[1], rng))
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn param_len(&self) -> usize {
        self.layers.iter().map(Dense::param_len).sum()
    }

    pub fn workspace(&self) -> MlpWorkspace {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(vec![0.0; self.input_dim()]);
        let mut widest = 0;
        for layer in &self.layers {
            acts.push(vec![0.0; layer.out_dim]);
            widest = widest.max(layer.out_dim).max(layer.in_dim);
        }
        MlpWorkspace {
            acts,
            delta: vec![0.0; widest],
            delta_next: vec![0.0; widest],
        }
    }

    /// Forward pass recording activations; returns the output slice.
    pub fn forward<'w>(&self, input: &[f64], ws: &'w mut MlpWorkspace) -> &'w [f64] {
        assert_eq!(
            input.len(),
            self.input_dim(),
            "observation width {} does not match network input {}",
            input.len(),
            self.input_dim()
        );
        ws.acts[0].copy_from_slice(input);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = ws.acts.split_at_mut(k + 1);
            let x = &prev[k];
            let out = &mut rest[0];
            for o in 0..layer.out_dim {
                let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = layer.b[o];
                for (wi, xi) in row.iter().zip(x.iter()) {
                    acc += wi * xi;
                }
                out[o] = if k == last { acc } else { libm::tanh(acc) };
            }
        }
        &ws.acts[self.layers.len()]
    }

    /// Convenience forward pass without an external workspace.
    pub fn forward_alloc(&self, input: &[f64]) -> Vec<f64> {
        let mut ws = self.workspace();
        self.forward(input, &mut ws).to_vec()
    }

    /// Accumulate dLoss/dParams into `grads` (layout per [`Self::param_len`])
    /// given dLoss/dOutput and the activations recorded by the matching
    /// [`Self::forward`] call.
    pub fn backward(&self, ws: &mut MlpWorkspace, dout: &[f64], grads: &mut [f64]) {
        debug_assert_eq!(grads.len(), self.param_len());
        debug_assert_eq!(dout.len(), self.output_dim());
        ws.delta[..dout.len()].copy_from_slice(dout);
        // Per-layer flat offsets, last layer first.
        let mut offset = self.param_len();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            offset -= layer.param_len();
            let x = &ws.acts[k];
            let (gw, gb) = grads[offset..offset + layer.param_len()]
                .split_at_mut(layer.w.len());
            for o in 0..layer.out_dim {
                let d = ws.delta[o];
                gb[o] += d;
                let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, xi) in row.iter_mut().zip(x.iter()) {
                    *g += d * xi;
                }
            }
            if k > 0 {
                // d/dx through the weights, then through the tanh of the
                // previous hidden layer (x here is its post-activation).
                for i in 0..layer.in_dim {
                    let mut acc = 0.0;
                    for o in 0..layer.out_dim {
                        acc += ws.delta[o] * layer.w[o * layer.in_dim + i];
                    }
                    ws.delta_next[i] = acc * (1.0 - x[i] * x[i]);
                }
                let n = layer.in_dim;
                let (d, dn) = (&mut ws.delta, &mut ws.delta_next);
                d[..n].copy_from_slice(&dn[..n]);
            }
        }
    }
}

/// Actor and critic networks plus the state-independent Gaussian log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub actor: Mlp,
    pub critic: Mlp,
    pub log_std: Vec<f64>,
}

impl PolicyParams {
    /// Fresh networks: `obs_dim -> hidden... -> act_dim` for the actor,
    /// `obs_dim -> hidden... -> 1` for the critic, log-std initialized to 0.
    pub fn new(obs_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend_from_slice(hidden);
        actor_dims.push(act_dim);
        let mut critic_dims = vec![obs_dim];
        critic_dims.extend_from_slice(hidden);
        critic_dims.push(1);
        Self {
            actor: Mlp::new(&actor_dims, rng),
            critic: Mlp::new(&critic_dims, rng),
            log_std: vec![0.0; act_dim],
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    /// History depth implied by the input width.
    pub fn history_len(&self) -> usize {
        self.obs_dim() / FRAME_LEN
    }

    pub fn flat_len(&self) -> usize {
        self.actor.param_len() + self.critic.param_len() + self.log_std.len()
    }

    pub fn actor_offset(&self) -> usize {
        0
    }

    pub fn critic_offset(&self) -> usize {
        self.actor.param_len()
    }

    pub fn log_std_offset(&self) -> usize {
        self.actor.param_len() + self.critic.param_len()
    }

    /// Canonical flat parameter vector (actor, critic, log-std).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        for mlp in [&self.actor, &self.critic] {
            for layer in &mlp.layers {
                out.extend_from_slice(&layer.w);
                out.extend_from_slice(&layer.b);
            }
        }
        out.extend_from_slice(&self.log_std);
        out
    }

    /// Overwrite all parameters from a flat vector in canonical order.
    /// The log-std entries are clamped to their allowed range.
    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.flat_len());
        let mut pos = 0;
        for mlp in [&mut self.actor, &mut self.critic] {
            for layer in &mut mlp.layers {
                let wn = layer.w.len();
                layer.w.copy_from_slice(&flat[pos..pos + wn]);
                pos += wn;
                let bn = layer.b.len();
                layer.b.copy_from_slice(&flat[pos..pos + bn]);
                pos += bn;
            }
        }
        for (dst, src) in self.log_std.iter_mut().zip(&flat[pos..]) {
            *dst = src.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }

    /// Deterministic evaluation: action mean and value estimate.
    pub fn forward(&self, obs: &[f64]) -> (Vec<f64>, f64) {
        let mean = self.actor.forward_alloc(obs);
        let value = self.critic.forward_alloc(obs)[0];
        (mean, value)
    }
}

/// Diagonal-Gaussian log density of `action` under (mean, log_std).
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    debug_assert_eq!(mean.len(), action.len());
    let half_log_2pi = 0.5 * libm::log(2.0 * core::f64::consts::PI);
    let mut acc = 0.0;
    for ((m, ls), a) in mean.iter().zip(log_std).zip(action) {
        let inv_std = libm::exp(-ls);
        let z = (a - m) * inv_std;
        acc += -0.5 * z * z - ls - half_log_2pi;
    }
    acc
}

/// Entropy of the diagonal Gaussian (state independent).
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    let per_dim = 0.5 * (1.0 + libm::log(2.0 * core::f64::consts::PI));
    log_std.iter().sum::<f64>() + per_dim * log_std.len() as f64
}

/// Draw `mean + exp(log_std) * eps` and its exact log density. The caller
/// clamps the action downstream; the density is of the pre-clamp sample.
pub fn sample_from_mean(
    mean: &[f64],
    log_std: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(m, ls)| {
            let eps: f64 = rng.sample(rand_distr::StandardNormal);
            m + libm::exp(*ls) * eps
        })
        .collect();
    let log_prob = gaussian_log_prob(mean, log_std, &action);
    (action, log_prob)
}

/// Stochastic policy head: forward the actor and sample from the Gaussian.
pub fn sample_action(
    params: &PolicyParams,
    obs: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let mean = params.actor.forward_alloc(obs);
    sample_from_mean(&mean, &params.log_std, rng)
}

/// Fixed per-component observation scaling: positions normalized by the
/// 2 m start region, velocities by 1 m/s (identity), quaternion and action
/// components raw. Keeps evaluation reproducible from checkpoints alone.
pub fn normalize_observation(values: &mut [f64]) {
    debug_assert_eq!(values.len() % FRAME_LEN, 0);
    for frame in values.chunks_mut(FRAME_LEN) {
        frame[0] *= 0.5;
        frame[1] *= 0.5;
        frame[2] *= 0.5;
    }
}
