//! Run configuration: named presets, TOML overrides, scale profiles, and
//! conversion into the core simulation/learner types.
//!
//! A run file selects a preset and overrides any subset of fields:
//!
//! ```toml
//! preset = "large_dr"
//!
//! [ppo]
//! iterations = 200
//! ```
//!
//! Resolution order: preset defaults, then the `--scale` profile, then the
//! file's explicit overrides (deep-merged per key, arrays replaced whole).
//! The fully resolved config is echoed into every run directory so outputs
//! are self-describing.

use anyhow::{anyhow, bail, Context, Result};
use dockrl_core::actuation::{Thruster, ThrusterLayout};
use dockrl_core::envdock::{
    DockingConfig, DomainRandomization, OffsetSampling, VehicleModel, FRAME_LEN,
};
use dockrl_core::hydro::HydroParams;
use dockrl_core::learner::PpoConfig;
use dockrl_core::rigidbody::{MassProperties, PayloadSpec};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const PRESET_NAMES: [&str; 4] = ["naive", "small_dr", "large_dr", "large_dr_history"];

/// Execution scale: the full lane/iteration budget or a desk profile that
/// finishes quickly on commodity hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Scale {
    /// 2048 parallel environments, 500 iterations.
    #[default]
    Paper,
    /// 256 parallel environments, 150 iterations.
    Desk,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvSection {
    pub dock_position: [f64; 3],
    pub dock_opening_axis: [f64; 3],
    pub dock_inner_size: f64,
    pub start_region_size: f64,
    pub episode_len: u32,
    pub dt: f64,
    pub reward_lambda1: f64,
    pub reward_lambda2: f64,
    pub history_len: usize,
    pub success_pos_threshold: f64,
    pub success_ang_threshold: f64,
    pub attitude_jitter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DrSection {
    pub enabled: bool,
    pub mass_upper: f64,
    pub spawn_radius: f64,
    /// "surface" (default) or "ball".
    pub sampling: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PpoSection {
    pub clip_ratio: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub learning_rate: f64,
    pub lr_decay: bool,
    pub epochs: usize,
    pub minibatches: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub rollout_len: usize,
    pub num_envs: usize,
    pub iterations: usize,
    pub grad_chunks: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainSection {
    pub hidden_layers: Vec<usize>,
    /// Checkpoint cadence in iterations (a final checkpoint always lands).
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VehicleSection {
    pub mass: f64,
    pub com_offset: [f64; 3],
    pub inertia_diag: [f64; 3],
    pub displaced_volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HydroSection {
    pub box_dims: [f64; 3],
    pub fluid_density: f64,
    pub lin_damping: [f64; 6],
    pub quad_damping: [f64; 6],
    pub cob_offset: [f64; 3],
    pub added_mass_coef: f64,
    pub added_inertia_coef: f64,
    pub bias_wrench: [f64; 6],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThrusterSection {
    pub position: [f64; 3],
    pub axis: [f64; 3],
    pub max_rotor_speed: f64,
    pub thrust_coeff: f64,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub seeds: Vec<u64>,
    pub env: EnvSection,
    pub dr: DrSection,
    pub ppo: PpoSection,
    pub train: TrainSection,
    pub vehicle: VehicleSection,
    pub hydro: HydroSection,
    pub thrusters: Vec<ThrusterSection>,
}

impl RunConfig {
    /// Baseline defaults shared by every preset (the naive setup).
    fn base() -> RunConfig {
        let hydro = dockrl_core::bluerov::hydro_params();
        let props = dockrl_core::bluerov::mass_properties();
        let layout = dockrl_core::bluerov::thruster_layout();
        RunConfig {
            name: "naive".to_string(),
            seeds: vec![0, 1, 2],
            env: EnvSection {
                dock_position: [0.0; 3],
                dock_opening_axis: [1.0, 0.0, 0.0],
                dock_inner_size: 0.7,
                start_region_size: 2.0,
                episode_len: 400,
                dt: 0.05,
                reward_lambda1: 0.2,
                reward_lambda2: 0.03,
                history_len: 1,
                success_pos_threshold: 0.15,
                success_ang_threshold: 0.25,
                attitude_jitter: 0.0,
            },
            dr: DrSection {
                enabled: false,
                mass_upper: 0.0,
                spawn_radius: 0.0,
                sampling: "surface".to_string(),
            },
            ppo: PpoSection {
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
            },
            train: TrainSection {
                hidden_layers: vec![128, 128],
                checkpoint_every: 50,
            },
            vehicle: VehicleSection {
                mass: props.mass,
                com_offset: [0.0; 3],
                inertia_diag: [
                    props.inertia[(0, 0)],
                    props.inertia[(1, 1)],
                    props.inertia[(2, 2)],
                ],
                displaced_volume: props.displaced_volume,
            },
            hydro: HydroSection {
                box_dims: [hydro.box_dims.x, hydro.box_dims.y, hydro.box_dims.z],
                fluid_density: hydro.fluid_density,
                lin_damping: hydro.lin_damping,
                quad_damping: hydro.quad_damping,
                cob_offset: [
                    hydro.cob_offset.x,
                    hydro.cob_offset.y,
                    hydro.cob_offset.z,
                ],
                added_mass_coef: hydro.added_mass_coef,
                added_inertia_coef: hydro.added_inertia_coef,
                bias_wrench: hydro.bias_wrench,
            },
            thrusters: layout
                .thrusters
                .iter()
                .map(|t| ThrusterSection {
                    position: [t.position.x, t.position.y, t.position.z],
                    axis: [t.axis.x, t.axis.y, t.axis.z],
                    max_rotor_speed: t.max_rotor_speed,
                    thrust_coeff: t.thrust_coeff,
                })
                .collect(),
        }
    }

    /// One of the four named training configurations.
    pub fn preset(name: &str) -> Result<RunConfig> {
        let mut cfg = Self::base();
        cfg.name = name.to_string();
        match name {
            "naive" => {}
            "small_dr" => {
                cfg.dr = DrSection {
                    enabled: true,
                    mass_upper: 2.5,
                    spawn_radius: 0.1,
                    sampling: "surface".to_string(),
                };
            }
            "large_dr" => {
                cfg.dr = DrSection {
                    enabled: true,
                    mass_upper: 5.0,
                    spawn_radius: 0.3,
                    sampling: "surface".to_string(),
                };
            }
            "large_dr_history" => {
                cfg.dr = DrSection {
                    enabled: true,
                    mass_upper: 5.0,
                    spawn_radius: 0.3,
                    sampling: "surface".to_string(),
                };
                cfg.env.history_len = 3;
            }
            other => bail!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            ),
        }
        Ok(cfg)
    }

    pub fn apply_scale(&mut self, scale: Scale) {
        match scale {
            Scale::Paper => {
                self.ppo.num_envs = 2048;
                self.ppo.iterations = 500;
            }
            Scale::Desk => {
                self.ppo.num_envs = 256;
                self.ppo.iterations = 150;
            }
        }
    }

    /// Load a run file: optional `preset` key plus overrides, deep-merged.
    pub fn load(path: &Path, scale: Scale) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, scale).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str, scale: Scale) -> Result<RunConfig> {
        let mut overrides: toml::Table = text.parse().context("parsing TOML")?;
        let preset_name = match overrides.remove("preset") {
            Some(toml::Value::String(s)) => s,
            Some(other) => bail!("'preset' must be a string, got {other}"),
            None => "naive".to_string(),
        };
        let mut cfg = Self::preset(&preset_name)?;
        cfg.apply_scale(scale);
        let mut table = toml::Table::try_from(&cfg).context("serializing preset")?;
        deep_merge(&mut table, overrides)?;
        let merged: RunConfig = table.try_into().context("applying overrides")?;
        merged.validate()?;
        Ok(merged)
    }

    /// SHA-256 over the canonical TOML rendering of the resolved config.
    pub fn hash(&self) -> [u8; 32] {
        let text = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hasher.finalize().into()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn obs_dim(&self) -> usize {
        FRAME_LEN * self.env.history_len
    }

    pub fn docking_config(&self) -> DockingConfig {
        DockingConfig {
            dock_position: Vector3::from(self.env.dock_position),
            dock_opening_axis: Vector3::from(self.env.dock_opening_axis),
            dock_inner_size: self.env.dock_inner_size,
            start_region_size: self.env.start_region_size,
            episode_len: self.env.episode_len,
            dt: self.env.dt,
            reward_lambda1: self.env.reward_lambda1,
            reward_lambda2: self.env.reward_lambda2,
            history_len: self.env.history_len,
            success_pos_threshold: self.env.success_pos_threshold,
            success_ang_threshold: self.env.success_ang_threshold,
            attitude_jitter: self.env.attitude_jitter,
        }
    }

    pub fn domain_randomization(&self) -> DomainRandomization {
        DomainRandomization {
            enabled: self.dr.enabled,
            mass_upper: self.dr.mass_upper,
            spawn_radius: self.dr.spawn_radius,
            sampling: if self.dr.sampling == "ball" {
                OffsetSampling::Ball
            } else {
                OffsetSampling::Surface
            },
        }
    }

    pub fn vehicle_model(&self) -> VehicleModel {
        let v = &self.vehicle;
        let h = &self.hydro;
        let thrusters: Vec<Thruster> = self
            .thrusters
            .iter()
            .map(|t| Thruster {
                position: Vector3::from(t.position),
                axis: Vector3::from(t.axis),
                max_rotor_speed: t.max_rotor_speed,
                thrust_coeff: t.thrust_coeff,
            })
            .collect();
        VehicleModel {
            mass_props: MassProperties {
                mass: v.mass,
                com_offset: Vector3::from(v.com_offset),
                inertia: Matrix3::from_diagonal(&Vector3::from(v.inertia_diag)),
                displaced_volume: v.displaced_volume,
            },
            hydro: HydroParams {
                box_dims: Vector3::from(h.box_dims),
                fluid_density: h.fluid_density,
                lin_damping: h.lin_damping,
                quad_damping: h.quad_damping,
                cob_offset: Vector3::from(h.cob_offset),
                added_mass_coef: h.added_mass_coef,
                added_inertia_coef: h.added_inertia_coef,
                bias_wrench: h.bias_wrench,
            },
            thrusters: ThrusterLayout {
                thrusters: thrusters
                    .try_into()
                    .expect("thruster count validated to 8"),
            },
        }
    }

    pub fn ppo_config(&self) -> PpoConfig {
        let p = &self.ppo;
        PpoConfig {
            clip_ratio: p.clip_ratio,
            gamma: p.gamma,
            gae_lambda: p.gae_lambda,
            learning_rate: p.learning_rate,
            lr_decay: p.lr_decay,
            epochs: p.epochs,
            minibatches: p.minibatches,
            value_coef: p.value_coef,
            entropy_coef: p.entropy_coef,
            max_grad_norm: p.max_grad_norm,
            rollout_len: p.rollout_len,
            num_envs: p.num_envs,
            iterations: p.iterations,
            grad_chunks: p.grad_chunks,
        }
    }

    /// Validate every section through the core types' own checks.
    pub fn validate(&self) -> Result<()> {
        if self.thrusters.len() != 8 {
            bail!("expected 8 thrusters, got {}", self.thrusters.len());
        }
        if !(self.dr.sampling == "surface" || self.dr.sampling == "ball") {
            bail!("dr.sampling must be 'surface' or 'ball'");
        }
        if self.dr.mass_upper < 0.0 || self.dr.spawn_radius < 0.0 {
            bail!("dr.mass_upper and dr.spawn_radius must be non-negative");
        }
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.train.hidden_layers.is_empty() {
            bail!("train.hidden_layers must name at least one layer");
        }
        if self.train.checkpoint_every == 0 {
            bail!("train.checkpoint_every must be at least 1");
        }
        self.docking_config()
            .validate()
            .map_err(|e| anyhow!("env: {e}"))?;
        self.vehicle_model().validate().map_err(|e| anyhow!(e))?;
        self.ppo_config().validate().map_err(|e| anyhow!("ppo: {e}"))?;
        Ok(())
    }
}

/// The three evaluation payload scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScenarioName {
    Easy,
    Medium,
    Hard,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 3] = [Self::Easy, Self::Medium, Self::Hard];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Easy => "easy",
            Self::Medium => "medium",
            Self::Hard => "hard",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Self::Easy => 0,
            Self::Medium => 1,
            Self::Hard => 2,
        }
    }

    pub fn payload(&self) -> PayloadSpec {
        match self {
            Self::Easy => PayloadSpec::none(),
            Self::Medium => PayloadSpec {
                mass: 3.5,
                offset: Vector3::new(0.15, 0.0, 0.0),
            },
            Self::Hard => PayloadSpec {
                mass: 7.0,
                offset: Vector3::new(0.3, 0.0, 0.0),
            },
        }
    }
}

/// Evaluation protocol parameters: a named payload and an episode count
/// (20 per the protocol unless overridden).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalScenario {
    pub name: ScenarioName,
    pub payload: PayloadSpec,
    pub episodes: usize,
}

impl EvalScenario {
    pub fn new(name: ScenarioName) -> Self {
        Self {
            name,
            payload: name.payload(),
            episodes: 20,
        }
    }

    pub fn with_episodes(name: ScenarioName, episodes: usize) -> Self {
        Self {
            episodes,
            ..Self::new(name)
        }
    }
}

fn deep_merge(base: &mut toml::Table, overrides: toml::Table) -> Result<()> {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => deep_merge(b, o)?,
            (Some(slot), v) => {
                if std::mem::discriminant(slot) != std::mem::discriminant(&v)
                    && !matches!(
                        (&*slot, &v),
                        (toml::Value::Float(_), toml::Value::Integer(_))
                    )
                {
                    bail!("type mismatch for key '{key}'");
                }
                *slot = match (&*slot, v) {
                    // Allow writing `3` where the schema expects `3.0`.
                    (toml::Value::Float(_), toml::Value::Integer(i)) => {
                        toml::Value::Float(i as f64)
                    }
                    (_, v) => v,
                };
            }
            (None, _) => bail!("unknown config key '{key}'"),
        }
    }
    Ok(())
}
