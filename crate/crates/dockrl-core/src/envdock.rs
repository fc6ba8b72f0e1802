//! The docking MDP: reset sampling, payload domain randomization,
//! observation assembly with history stacking, reward, stepping, and
//! termination.
//!
//! Geometry convention: `dock_opening_axis` is the direction of entry
//! through the station's open face (+x by default). The start region is a
//! cube on the approach side, so a freshly reset vehicle with identity
//! attitude faces the dock and closes the gap by driving forward. The dock
//! is a goal region, not collision geometry; trajectories may pass through
//! its walls.

use crate::actuation::{body_wrench, ActionCommand, ThrusterLayout};
use crate::hydro::{added_mass, bias_wrench, damping_wrench, restoring_wrench, HydroParams};
use crate::rigidbody::{
    body_rates_to_euler_rates, compose_payload, integrate_step_augmented, quat_to_euler,
    wrap_angle, BodyState, MassProperties, PayloadSpec,
};
use alloc::collections::VecDeque;
use alloc::vec::Vec;
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Observation components per frame: 3 + 4 + 3 + 3 + 8.
pub const FRAME_LEN: usize = 21;
/// Action dimension (one command per thruster).
pub const ACTION_LEN: usize = 8;

/// Static description of the docking task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DockingConfig {
    /// Dock center in the world frame, meters.
    pub dock_position: Vector3<f64>,
    /// Unit direction of entry through the open face.
    pub dock_opening_axis: Vector3<f64>,
    /// Inner edge length of the hollow docking cube, meters.
    pub dock_inner_size: f64,
    /// Edge length of the cubic start region, meters.
    pub start_region_size: f64,
    /// Episode horizon in control steps.
    pub episode_len: u32,
    /// Control/integration period, seconds.
    pub dt: f64,
    /// Weight on the positional reward term.
    pub reward_lambda1: f64,
    /// Weight on the orientation reward term.
    pub reward_lambda2: f64,
    /// Number of stacked observation frames, >= 1.
    pub history_len: usize,
    /// Positional error below which the info channel reports success, m.
    pub success_pos_threshold: f64,
    /// Angular error below which the info channel reports success, rad.
    pub success_ang_threshold: f64,
    /// Half-range of optional uniform attitude jitter at reset, rad (0 = off).
    pub attitude_jitter: f64,
}

impl Default for DockingConfig {
    fn default() -> Self {
        Self {
            dock_position: Vector3::zeros(),
            dock_opening_axis: Vector3::new(1.0, 0.0, 0.0),
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
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigError {
    NonUnitOpeningAxis,
    NonPositiveSize,
    ZeroEpisodeLen,
    NonPositiveDt,
    ZeroHistory,
    NonPositiveLambda,
}

impl core::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            Self::NonUnitOpeningAxis => "dock opening axis must be unit length",
            Self::NonPositiveSize => "dock and start-region sizes must be positive",
            Self::ZeroEpisodeLen => "episode length must be at least 1",
            Self::NonPositiveDt => "dt must be positive",
            Self::ZeroHistory => "history length must be at least 1",
            Self::NonPositiveLambda => "reward weights must be positive",
        };
        write!(f, "{msg}")
    }
}

impl core::error::Error for ConfigError {}

impl DockingConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if (self.dock_opening_axis.norm() - 1.0).abs() > 1e-9 {
            return Err(ConfigError::NonUnitOpeningAxis);
        }
        if !(self.dock_inner_size > 0.0 && self.start_region_size > 0.0) {
            return Err(ConfigError::NonPositiveSize);
        }
        if self.episode_len == 0 {
            return Err(ConfigError::ZeroEpisodeLen);
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::NonPositiveDt);
        }
        if self.history_len == 0 {
            return Err(ConfigError::ZeroHistory);
        }
        if !(self.reward_lambda1 > 0.0 && self.reward_lambda2 > 0.0) {
            return Err(ConfigError::NonPositiveLambda);
        }
        Ok(())
    }

    /// Center of the start cube: one dock length of clearance between the
    /// open face plane and the nearest cube face.
    pub fn start_region_center(&self) -> Vector3<f64> {
        let standoff =
            0.5 * self.dock_inner_size + self.dock_inner_size + 0.5 * self.start_region_size;
        self.dock_position - self.dock_opening_axis * standoff
    }
}

/// How payload attachment offsets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetSampling {
    /// Uniform over the sphere surface at `spawn_radius` (default).
    #[default]
    Surface,
    /// Uniform over the solid ball of radius `spawn_radius`.
    Ball,
}

/// Payload domain-randomization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainRandomization {
    pub enabled: bool,
    /// Upper bound of the uniform payload mass draw, kg.
    pub mass_upper: f64,
    /// Radius of the attachment sphere, meters.
    pub spawn_radius: f64,
    pub sampling: OffsetSampling,
}

impl DomainRandomization {
    pub const fn disabled() -> Self {
        Self {
            enabled: false,
            mass_upper: 0.0,
            spawn_radius: 0.0,
            sampling: OffsetSampling::Surface,
        }
    }
}

impl Default for DomainRandomization {
    fn default() -> Self {
        Self::disabled()
    }
}

/// Draw a payload: mass uniform in [0, mass_upper], offset uniform on the
/// sphere (or ball) of radius `spawn_radius`. Disabled randomization yields
/// the zero payload.
pub fn sample_payload(rng: &mut ChaCha8Rng, dr: &DomainRandomization) -> PayloadSpec {
    if !dr.enabled {
        return PayloadSpec::none();
    }
    let mass = rng.random::<f64>() * dr.mass_upper;
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random::<f64>() * 2.0 * core::f64::consts::PI;
    let s = libm::sqrt((1.0 - z * z).max(0.0));
    let dir = Vector3::new(s * libm::cos(phi), s * libm::sin(phi), z);
    let radius = match dr.sampling {
        OffsetSampling::Surface => dr.spawn_radius,
        OffsetSampling::Ball => dr.spawn_radius * libm::cbrt(rng.random::<f64>()),
    };
    PayloadSpec {
        mass,
        offset: dir * radius,
    }
}

/// One observation frame in the order (rel dock pos, attitude quaternion,
/// linear velocity, Euler-rate angular velocity, previous action).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub rel_dock_pos: Vector3<f64>,
    /// Attitude as (w, x, y, z).
    pub attitude: [f64; 4],
    pub lin_vel: Vector3<f64>,
    pub ang_vel_euler: Vector3<f64>,
    pub prev_action: [f64; ACTION_LEN],
}

impl Frame {
    pub fn pack(&self) -> [f64; FRAME_LEN] {
        let mut out = [0.0; FRAME_LEN];
        out[0..3].copy_from_slice(self.rel_dock_pos.as_slice());
        out[3..7].copy_from_slice(&self.attitude);
        out[7..10].copy_from_slice(self.lin_vel.as_slice());
        out[10..13].copy_from_slice(self.ang_vel_euler.as_slice());
        out[13..21].copy_from_slice(&self.prev_action);
        out
    }
}

/// History of the last `h` frames, flattened oldest-first.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    values: Vec<f64>,
}

impl Observation {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The most recent frame's components.
    pub fn latest(&self) -> &[f64] {
        &self.values[self.values.len() - FRAME_LEN..]
    }
}

/// Pack the instantaneous state into one observation frame.
pub fn assemble_observation(
    state: &BodyState,
    prev_action: &[f64; ACTION_LEN],
    cfg: &DockingConfig,
) -> Frame {
    let q = state.attitude;
    Frame {
        rel_dock_pos: cfg.dock_position - state.position,
        attitude: [q.w, q.i, q.j, q.k],
        lin_vel: state.lin_vel,
        ang_vel_euler: body_rates_to_euler_rates(&state.attitude, &state.ang_vel),
        prev_action: *prev_action,
    }
}

/// Distance and wrapped-Euler orientation errors of a state relative to
/// the dock.
pub fn docking_errors(state: &BodyState, cfg: &DockingConfig) -> (f64, f64) {
    let pos_err = (state.position - cfg.dock_position).norm();
    let euler = quat_to_euler(&state.attitude);
    let wrapped = Vector3::new(
        wrap_angle(euler.x),
        wrap_angle(euler.y),
        wrap_angle(euler.z),
    );
    (pos_err, wrapped.norm())
}

/// Dense docking reward: `l1 * exp(-pos_err) + l2 * exp(-ang_err)`.
///
/// The orientation error is the Euclidean norm of the ZYX Euler angles,
/// each wrapped to (-pi, pi] before the norm; the target orientation is the
/// zero vector (forward-facing).
pub fn compute_reward(state: &BodyState, cfg: &DockingConfig) -> f64 {
    let (pos_err, ang_err) = docking_errors(state, cfg);
    cfg.reward_lambda1 * libm::exp(-pos_err) + cfg.reward_lambda2 * libm::exp(-ang_err)
}

/// Per-step diagnostics alongside the reward.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub pos_err: f64,
    pub ang_err: f64,
    pub success: bool,
    pub fault: bool,
}

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub info: StepInfo,
}

/// Everything that defines the vehicle plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleModel {
    pub mass_props: MassProperties,
    pub hydro: HydroParams,
    pub thrusters: ThrusterLayout,
}

impl VehicleModel {
    pub fn validate(&self) -> Result<(), alloc::string::String> {
        use alloc::string::ToString;
        self.mass_props.validate().map_err(|e| e.to_string())?;
        self.hydro.validate().map_err(|e| e.to_string())?;
        self.thrusters.validate().map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// A single docking environment instance.
///
/// One instance is strictly single-threaded; batches of instances step
/// independently, each owning its RNG stream, so results do not depend on
/// scheduling.
#[derive(Debug, Clone)]
pub struct DockingEnv {
    cfg: DockingConfig,
    dr: DomainRandomization,
    vehicle: VehicleModel,
    added: [f64; 6],
    rng: ChaCha8Rng,
    state: BodyState,
    props: MassProperties,
    payload: PayloadSpec,
    history: VecDeque<Frame>,
    prev_action: [f64; ACTION_LEN],
    step_count: u32,
    initialized: bool,
    done: bool,
}

impl DockingEnv {
    pub fn new(
        vehicle: VehicleModel,
        cfg: DockingConfig,
        dr: DomainRandomization,
        rng: ChaCha8Rng,
    ) -> Self {
        let added = added_mass(&vehicle.hydro);
        let state = BodyState::at_rest(cfg.start_region_center());
        let props = vehicle.mass_props;
        Self {
            cfg,
            dr,
            vehicle,
            added,
            rng,
            state,
            props,
            payload: PayloadSpec::none(),
            history: VecDeque::new(),
            prev_action: [0.0; ACTION_LEN],
            step_count: 0,
            initialized: false,
            done: false,
        }
    }

    pub fn config(&self) -> &DockingConfig {
        &self.cfg
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    /// Mass properties currently in effect (vehicle plus composed payload).
    pub fn mass_props(&self) -> &MassProperties {
        &self.props
    }

    pub fn payload(&self) -> &PayloadSpec {
        &self.payload
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Start a new episode with a payload drawn from the DR settings.
    pub fn reset(&mut self) -> Observation {
        let payload = sample_payload(&mut self.rng, &self.dr);
        self.reset_with_payload(payload)
    }

    /// Start a new episode with an explicitly chosen payload (used by the
    /// evaluation scenarios, where randomization is off).
    pub fn reset_with_payload(&mut self, payload: PayloadSpec) -> Observation {
        let half = 0.5 * self.cfg.start_region_size;
        let center = self.cfg.start_region_center();
        let axis = self.cfg.dock_opening_axis;
        let (b1, b2) = lateral_basis(&axis);
        let u: f64 = self.rng.random_range(-1.0..=1.0);
        let v: f64 = self.rng.random_range(-1.0..=1.0);
        let w: f64 = self.rng.random_range(-1.0..=1.0);
        let position = center + (axis * u + b1 * v + b2 * w) * half;

        let mut state = BodyState::at_rest(position);
        if self.cfg.attitude_jitter > 0.0 {
            let j = self.cfg.attitude_jitter;
            let euler = Vector3::new(
                self.rng.random_range(-j..=j),
                self.rng.random_range(-j..=j),
                self.rng.random_range(-j..=j),
            );
            state.attitude = crate::rigidbody::euler_to_quat(&euler);
        }

        self.payload = payload;
        self.props = compose_payload(&self.vehicle.mass_props, &payload);
        self.state = state;
        self.prev_action = [0.0; ACTION_LEN];
        self.step_count = 0;
        self.initialized = true;
        self.done = false;

        let frame = assemble_observation(&self.state, &self.prev_action, &self.cfg);
        self.history.clear();
        for _ in 0..self.cfg.history_len {
            self.history.push_back(frame);
        }
        self.observation()
    }

    /// Apply one clamped command for `dt`: thruster, damping, restoring,
    /// and bias wrenches are summed and integrated, the history ring gains
    /// the new frame, and the reward is evaluated on the new state.
    ///
    /// A non-finite integration result terminates the episode as a fault
    /// with zero reward for the faulting step.
    pub fn step(&mut self, cmd: &ActionCommand) -> StepResult {
        assert!(
            self.initialized && !self.done,
            "environment must be reset before stepping"
        );
        let clamped = cmd.clamped();
        let wrench = body_wrench(&clamped, &self.vehicle.thrusters)
            .add(&damping_wrench(&self.state, &self.vehicle.hydro))
            .add(&restoring_wrench(&self.state, &self.props, &self.vehicle.hydro))
            .add(&bias_wrench(&self.vehicle.hydro));

        self.step_count += 1;
        match integrate_step_augmented(&self.state, &wrench, &self.props, &self.added, self.cfg.dt)
        {
            Ok(next) => {
                self.state = next;
                self.prev_action = clamped.0;
                let frame = assemble_observation(&self.state, &self.prev_action, &self.cfg);
                self.history.pop_front();
                self.history.push_back(frame);

                let (pos_err, ang_err) = docking_errors(&self.state, &self.cfg);
                let terminated = self.step_count >= self.cfg.episode_len;
                self.done = terminated;
                StepResult {
                    observation: self.observation(),
                    reward: compute_reward(&self.state, &self.cfg),
                    terminated,
                    info: StepInfo {
                        pos_err,
                        ang_err,
                        success: pos_err < self.cfg.success_pos_threshold
                            && ang_err < self.cfg.success_ang_threshold,
                        fault: false,
                    },
                }
            }
            Err(_) => {
                // Keep the last good state for the final observation.
                self.done = true;
                let (pos_err, ang_err) = docking_errors(&self.state, &self.cfg);
                StepResult {
                    observation: self.observation(),
                    reward: 0.0,
                    terminated: true,
                    info: StepInfo {
                        pos_err,
                        ang_err,
                        success: false,
                        fault: true,
                    },
                }
            }
        }
    }

    /// Current stacked observation, oldest frame first.
    pub fn observation(&self) -> Observation {
        let mut values = Vec::with_capacity(FRAME_LEN * self.cfg.history_len);
        for frame in &self.history {
            values.extend_from_slice(&frame.pack());
        }
        Observation { values }
    }
}

/// Two unit vectors spanning the plane orthogonal to `axis`.
fn lateral_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let b1 = axis.cross(&helper).normalize();
    let b2 = axis.cross(&b1);
    (b1, b2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bluerov;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn vehicle() -> VehicleModel {
        VehicleModel {
            mass_props: bluerov::mass_properties(),
            hydro: bluerov::hydro_params(),
            thrusters: bluerov::thruster_layout(),
        }
    }

    fn env_with(cfg: DockingConfig, dr: DomainRandomization, seed: u64) -> DockingEnv {
        DockingEnv::new(vehicle(), cfg, dr, ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn disabled_dr_yields_zero_payload() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = sample_payload(&mut rng, &DomainRandomization::disabled());
        assert_eq!(p, PayloadSpec::none());
    }

    #[test]
    fn large_dr_samples_stay_in_range() {
        let dr = DomainRandomization {
            enabled: true,
            mass_upper: 5.0,
            spawn_radius: 0.3,
            sampling: OffsetSampling::Surface,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p = sample_payload(&mut rng, &dr);
            assert!((0.0..=5.0).contains(&p.mass));
            assert_relative_eq!(p.offset.norm(), 0.3, epsilon = 1e-9);
        }
    }

    #[test]
    fn ball_sampling_fills_the_interior() {
        let dr = DomainRandomization {
            enabled: true,
            mass_upper: 1.0,
            spawn_radius: 0.3,
            sampling: OffsetSampling::Ball,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut inner = 0usize;
        for _ in 0..2000 {
            let p = sample_payload(&mut rng, &dr);
            assert!(p.offset.norm() <= 0.3 + 1e-12);
            if p.offset.norm() < 0.2 {
                inner += 1;
            }
        }
        // P(r < 2/3 radius) = (2/3)^3 ~ 0.296 for a uniform ball.
        assert!(inner > 400 && inner < 800, "inner count {inner}");
    }

    #[test]
    fn reset_positions_fill_the_start_cube() {
        let cfg = DockingConfig::default();
        let mut env = env_with(cfg, DomainRandomization::disabled(), 5);
        let face_plane = cfg.dock_position.x - 0.5 * cfg.dock_inner_size;
        for _ in 0..10_000 {
            env.reset();
            let p = env.state().position;
            // Inside the cube.
            assert!(p.x >= -3.05 - 1e-12 && p.x <= -1.05 + 1e-12, "x = {}", p.x);
            assert!(p.y.abs() <= 1.0 + 1e-12);
            assert!(p.z.abs() <= 1.0 + 1e-12);
            // Never past the open face plane.
            assert!(p.x < face_plane);
        }
    }

    #[test]
    fn reset_fills_history_with_identical_frames() {
        let cfg = DockingConfig {
            history_len: 3,
            ..DockingConfig::default()
        };
        let mut env = env_with(cfg, DomainRandomization::disabled(), 6);
        let obs = env.reset();
        assert_eq!(obs.len(), 63);
        let v = obs.values();
        assert_eq!(&v[0..21], &v[21..42]);
        assert_eq!(&v[21..42], &v[42..63]);
    }

    #[test]
    fn reset_without_dr_keeps_baseline_mass() {
        let mut env = env_with(DockingConfig::default(), DomainRandomization::disabled(), 7);
        env.reset();
        assert_eq!(*env.mass_props(), bluerov::mass_properties());
    }

    #[test]
    fn reward_at_dock_aligned_is_lambda_sum() {
        let cfg = DockingConfig::default();
        let state = BodyState::at_rest(cfg.dock_position);
        assert_relative_eq!(compute_reward(&state, &cfg), 0.23, epsilon = 1e-15);
    }

    #[test]
    fn reward_one_meter_out_direct_evaluation() {
        let cfg = DockingConfig::default();
        let state = BodyState::at_rest(cfg.dock_position + Vector3::new(-1.0, 0.0, 0.0));
        assert_relative_eq!(
            compute_reward(&state, &cfg),
            0.10357588823428847,
            epsilon = 1e-15
        );
    }

    #[test]
    fn reward_is_monotone_in_each_error() {
        let cfg = DockingConfig::default();
        // Distance sweep at fixed attitude.
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let d = 0.1 * k as f64;
            let state = BodyState::at_rest(cfg.dock_position + Vector3::new(-d, 0.0, 0.0));
            let r = compute_reward(&state, &cfg);
            assert!(r < last || k == 0);
            last = r;
        }
        // Yaw sweep at fixed position.
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let yaw = 0.1 * k as f64;
            let mut state = BodyState::at_rest(cfg.dock_position + Vector3::new(-1.0, 0.0, 0.0));
            state.attitude = crate::rigidbody::euler_to_quat(&Vector3::new(0.0, 0.0, yaw));
            let r = compute_reward(&state, &cfg);
            assert!(r < last || k == 0);
            last = r;
        }
    }

    #[test]
    fn reward_stays_positive_far_away() {
        let cfg = DockingConfig::default();
        let state = BodyState::at_rest(Vector3::new(-1e6, 0.0, 0.0));
        let r = compute_reward(&state, &cfg);
        assert!(r > 0.0299999 && r <= 0.03 + 1e-12);
    }

    #[test]
    fn equilibrium_step_barely_moves() {
        // Balanced buoyancy through the COM: no net wrench at rest.
        let mut model = vehicle();
        model.hydro.cob_offset = Vector3::zeros();
        let cfg = DockingConfig::default();
        let mut env = DockingEnv::new(
            model,
            cfg,
            DomainRandomization::disabled(),
            ChaCha8Rng::seed_from_u64(8),
        );
        env.reset();
        let start = env.state().position;
        for _ in 0..10 {
            env.step(&ActionCommand::default());
        }
        assert!((env.state().position - start).norm() < 1e-6);
    }

    #[test]
    fn full_surge_closes_on_the_dock() {
        let mut env = env_with(DockingConfig::default(), DomainRandomization::disabled(), 9);
        env.reset();
        let mut cmd = ActionCommand::default();
        for i in 0..4 {
            cmd.0[i] = 1.0;
        }
        let mut last = docking_errors(env.state(), env.config()).0;
        for _ in 0..40 {
            let r = env.step(&cmd);
            assert!(r.info.pos_err < last, "{} !< {last}", r.info.pos_err);
            last = r.info.pos_err;
        }
    }

    #[test]
    fn horizon_terminates_episode() {
        let cfg = DockingConfig {
            episode_len: 5,
            ..DockingConfig::default()
        };
        let mut env = env_with(cfg, DomainRandomization::disabled(), 10);
        env.reset();
        for i in 1..=5 {
            let r = env.step(&ActionCommand::default());
            assert_eq!(r.terminated, i == 5);
        }
        assert!(env.is_done());
    }

    #[test]
    fn observation_at_dock_is_zeroed() {
        let cfg = DockingConfig::default();
        let state = BodyState::at_rest(cfg.dock_position);
        let frame = assemble_observation(&state, &[0.0; 8], &cfg);
        let packed = frame.pack();
        let expected: [f64; 21] = {
            let mut e = [0.0; 21];
            e[3] = 1.0; // identity quaternion w
            e
        };
        assert_eq!(packed, expected);
    }

    #[test]
    fn relative_position_sign_convention() {
        let cfg = DockingConfig::default();
        let state = BodyState::at_rest(cfg.dock_position + Vector3::new(-2.0, 0.0, 0.0));
        let frame = assemble_observation(&state, &[0.0; 8], &cfg);
        assert_eq!(frame.rel_dock_pos, Vector3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn packed_frame_length_is_fixed() {
        let cfg = DockingConfig::default();
        let mut env = env_with(cfg, DomainRandomization::disabled(), 11);
        let obs = env.reset();
        assert_eq!(obs.len(), FRAME_LEN);
        let mut cmd = ActionCommand::default();
        cmd.0[0] = 0.3;
        let r = env.step(&cmd);
        assert_eq!(r.observation.len(), FRAME_LEN);
    }

    #[test]
    fn history_evicts_oldest_first() {
        let cfg = DockingConfig {
            history_len: 3,
            ..DockingConfig::default()
        };
        let mut env = env_with(cfg, DomainRandomization::disabled(), 12);
        let initial = env.reset();
        let initial_frame: Vec<f64> = initial.values()[0..21].to_vec();
        let mut cmd = ActionCommand::default();
        cmd.0[0] = 0.5;
        // After one step the buffer holds (init, init, new).
        let r1 = env.step(&cmd);
        assert_eq!(&r1.observation.values()[0..21], &initial_frame[..]);
        assert_eq!(&r1.observation.values()[21..42], &initial_frame[..]);
        assert_ne!(&r1.observation.values()[42..63], &initial_frame[..]);
        // After two more steps the initial frame is fully evicted.
        let r2 = env.step(&cmd);
        let r3 = env.step(&cmd);
        assert_eq!(
            &r2.observation.values()[42..63],
            &r3.observation.values()[21..42]
        );
        assert_ne!(&r3.observation.values()[0..21], &initial_frame[..]);
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let cfg = DockingConfig::default();
        let dr = DomainRandomization {
            enabled: true,
            mass_upper: 5.0,
            spawn_radius: 0.3,
            sampling: OffsetSampling::Surface,
        };
        let mut a = env_with(cfg, dr, 77);
        let mut b = env_with(cfg, dr, 77);
        let obs_a = a.reset();
        let obs_b = b.reset();
        assert_eq!(obs_a, obs_b);
        let mut cmd = ActionCommand::default();
        for i in 0..60 {
            cmd.0[i % 8] = ((i as f64) * 0.37).sin();
            let ra = a.step(&cmd);
            let rb = b.step(&cmd);
            assert_eq!(ra.observation, rb.observation);
            assert_eq!(ra.reward.to_bits(), rb.reward.to_bits());
        }
    }

    #[test]
    fn attitude_jitter_randomizes_reset_orientation() {
        let cfg = DockingConfig {
            attitude_jitter: 0.2,
            ..DockingConfig::default()
        };
        let mut env = env_with(cfg, DomainRandomization::disabled(), 21);
        env.reset();
        let e = quat_to_euler(&env.state().attitude);
        assert!(e.norm() > 0.0);
        assert!(e.x.abs() <= 0.2 && e.y.abs() <= 0.2 && e.z.abs() <= 0.2);
    }

    #[test]
    fn bias_wrench_pushes_the_vehicle() {
        let mut model = vehicle();
        model.hydro.cob_offset = Vector3::zeros();
        model.hydro.bias_wrench = [0.0, 20.0, 0.0, 0.0, 0.0, 0.0];
        let mut env = DockingEnv::new(
            model,
            DockingConfig::default(),
            DomainRandomization::disabled(),
            ChaCha8Rng::seed_from_u64(22),
        );
        env.reset();
        let start = env.state().position;
        for _ in 0..20 {
            env.step(&ActionCommand::default());
        }
        assert!(env.state().position.y > start.y + 0.01);
    }

    #[test]
    fn prev_action_is_the_clamped_command() {
        let mut env = env_with(DockingConfig::default(), DomainRandomization::disabled(), 13);
        env.reset();
        let r = env.step(&ActionCommand([2.0, -3.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0]));
        let frame = &r.observation.values()[0..21];
        assert_eq!(frame[13], 1.0);
        assert_eq!(frame[14], -1.0);
        assert_eq!(frame[15], 0.25);
    }

    #[test]
    fn success_flag_thresholds() {
        let cfg = DockingConfig {
            episode_len: 1000,
            ..DockingConfig::default()
        };
        let state_in = BodyState::at_rest(cfg.dock_position + Vector3::new(0.1, 0.0, 0.0));
        let (pos, ang) = docking_errors(&state_in, &cfg);
        assert!(pos < cfg.success_pos_threshold && ang < cfg.success_ang_threshold);
        let state_out = BodyState::at_rest(cfg.dock_position + Vector3::new(0.2, 0.0, 0.0));
        let (pos, _) = docking_errors(&state_out, &cfg);
        assert!(pos > cfg.success_pos_threshold);
    }
}
