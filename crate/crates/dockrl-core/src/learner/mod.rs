//! From-scratch MLP actor-critic with a diagonal-Gaussian head,
//! generalized advantage estimation, and clipped-surrogate PPO updates.
//! Gradients are hand-derived reverse-mode for the fixed architecture; the
//! finite-difference suite in the crate tests is the safety net.

mod gae;
mod mlp;
mod ppo;

pub use gae::{compute_gae, normalize_advantages, RolloutBatch};
pub use mlp::{
    gaussian_entropy, gaussian_log_prob, normalize_observation, sample_action, sample_from_mean,
    Dense, Mlp, MlpWorkspace, PolicyParams, LOG_STD_MAX, LOG_STD_MIN,
};
pub use ppo::{
    grad_sums, ppo_update, ppo_update_with, AdamState, BatchContext, GradSums, LearnerError,
    PpoConfig, UpdateStats,
};
