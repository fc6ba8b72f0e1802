//! Quaternion-based 6-DOF rigid-body state and fixed-step integration.
//!
//! The body frame is x-forward, y-left, z-up. Positions and linear
//! velocities are stored in the world frame; angular velocity is stored in
//! the body frame. All dynamics are expressed about the body origin (not the
//! center of mass), so payload changes shift `com_offset` instead of
//! re-centering every other quantity.

use nalgebra::{Matrix3, Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};

/// Pose and twist of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    /// World-frame position of the body origin, meters.
    pub position: Vector3<f64>,
    /// Body-to-world attitude quaternion, kept unit-norm.
    pub attitude: UnitQuaternion<f64>,
    /// World-frame linear velocity of the body origin, m/s.
    pub lin_vel: Vector3<f64>,
    /// Body-frame angular velocity, rad/s.
    pub ang_vel: Vector3<f64>,
}

impl BodyState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            attitude: UnitQuaternion::identity(),
            lin_vel: Vector3::zeros(),
            ang_vel: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.attitude.as_vector().iter().all(|v| v.is_finite())
            && self.lin_vel.iter().all(|v| v.is_finite())
            && self.ang_vel.iter().all(|v| v.is_finite())
    }
}

/// Mass, center of mass, and inertia of the vehicle (plus any payloads),
/// all about the body origin in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProperties {
    /// Total mass, kg. Must be positive.
    pub mass: f64,
    /// Center-of-mass offset from the body origin, meters, body frame.
    pub com_offset: Vector3<f64>,
    /// Inertia tensor about the body origin, kg m^2. Symmetric positive definite.
    pub inertia: Matrix3<f64>,
    /// Displaced fluid volume used for buoyancy, m^3.
    pub displaced_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassPropertiesError {
    NonPositiveMass,
    AsymmetricInertia,
    NonPositiveDefiniteInertia,
    NegativeDisplacedVolume,
}

impl core::fmt::Display for MassPropertiesError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NonPositiveMass => write!(f, "mass must be positive"),
            Self::AsymmetricInertia => write!(f, "inertia tensor must be symmetric"),
            Self::NonPositiveDefiniteInertia => {
                write!(f, "inertia tensor must be positive definite")
            }
            Self::NegativeDisplacedVolume => write!(f, "displaced volume must be non-negative"),
        }
    }
}

impl core::error::Error for MassPropertiesError {}

impl MassProperties {
    pub fn validate(&self) -> Result<(), MassPropertiesError> {
        if !(self.mass > 0.0) {
            return Err(MassPropertiesError::NonPositiveMass);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (self.inertia[(i, j)] - self.inertia[(j, i)]).abs() > 1e-12 {
                    return Err(MassPropertiesError::AsymmetricInertia);
                }
            }
        }
        // SPD check: Cholesky succeeds iff all eigenvalues are positive.
        if self.inertia.cholesky().is_none() {
            return Err(MassPropertiesError::NonPositiveDefiniteInertia);
        }
        if self.displaced_volume < 0.0 {
            return Err(MassPropertiesError::NegativeDisplacedVolume);
        }
        Ok(())
    }
}

/// Point-mass payload rigidly attached to the hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadSpec {
    /// Payload mass, kg. Zero means no payload.
    pub mass: f64,
    /// Attachment point relative to the body origin, meters, body frame.
    pub offset: Vector3<f64>,
}

impl PayloadSpec {
    pub const fn none() -> Self {
        Self {
            mass: 0.0,
            offset: Vector3::new(0.0, 0.0, 0.0),
        }
    }
}

/// Force and torque in the body frame, about the body origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub const fn zero() -> Self {
        Self {
            force: Vector3::new(0.0, 0.0, 0.0),
            torque: Vector3::new(0.0, 0.0, 0.0),
        }
    }

    pub fn add(&self, other: &Wrench) -> Wrench {
        Wrench {
            force: self.force + other.force,
            torque: self.torque + other.torque,
        }
    }
}

/// Integration blew up: some state component came out NaN or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFiniteState;

impl core::fmt::Display for NonFiniteState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "integration produced a non-finite body state")
    }
}

impl core::error::Error for NonFiniteState {}

/// Combine vehicle properties with a point-mass payload.
///
/// Mass adds, the center of mass is the mass-weighted average, and the
/// payload's inertia contribution about the body origin enters via the
/// parallel-axis theorem. The payload is treated as a dense point mass: it
/// does not change the displaced volume.
pub fn compose_payload(vehicle: &MassProperties, payload: &PayloadSpec) -> MassProperties {
    if payload.mass == 0.0 {
        return *vehicle;
    }
    let total = vehicle.mass + payload.mass;
    let com = (vehicle.com_offset * vehicle.mass + payload.offset * payload.mass) / total;
    let r = payload.offset;
    let point_inertia = payload.mass * (Matrix3::identity() * r.norm_squared() - r * r.transpose());
    MassProperties {
        mass: total,
        com_offset: com,
        inertia: vehicle.inertia + point_inertia,
        displaced_volume: vehicle.displaced_volume,
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Advance the state by one semi-implicit Euler step under `wrench`.
///
/// Shorthand for [`integrate_step_augmented`] with no added mass.
pub fn integrate_step(
    state: &BodyState,
    wrench: &Wrench,
    props: &MassProperties,
    dt: f64,
) -> Result<BodyState, NonFiniteState> {
    integrate_step_augmented(state, wrench, props, &[0.0; 6], dt)
}

/// Advance the state by one semi-implicit Euler step, with per-axis added
/// mass/inertia folded into the generalized mass matrix as a diagonal
/// augmentation.
///
/// The momentum balance is written about the body origin in body
/// coordinates, so the center-of-mass offset appears as off-diagonal
/// coupling blocks rather than a frame shift:
///
/// ```text
/// | M11      -m [c]x | | dv |   | f   - w x p          |
/// | m [c]x    I_O    | | dw | = | tau - w x h - v x p  |
/// ```
///
/// with `p = M11 v - m c x w` and `h = m c x v + I_O w`. The convective
/// terms are exactly power-free, so with damping active the discrete step
/// dissipates energy for the time steps used here. Velocities update first,
/// then the pose; the quaternion advances by the exponential map of
/// `w * dt` and is renormalized.
pub fn integrate_step_augmented(
    state: &BodyState,
    wrench: &Wrench,
    props: &MassProperties,
    added: &[f64; 6],
    dt: f64,
) -> Result<BodyState, NonFiniteState> {
    debug_assert!(dt > 0.0);
    let rot = state.attitude;
    let v = rot.inverse_transform_vector(&state.lin_vel); // body frame
    let w = state.ang_vel;

    let m = props.mass;
    let c = props.com_offset;
    let m11 = Matrix3::from_diagonal(&Vector3::new(m + added[0], m + added[1], m + added[2]));
    let m22 = props.inertia + Matrix3::from_diagonal(&Vector3::new(added[3], added[4], added[5]));
    let coupling = skew(&c) * m;

    let p = m11 * v - coupling * w;
    let h = coupling * v + m22 * w;

    let rhs_f = wrench.force - w.cross(&p);
    let rhs_t = wrench.torque - w.cross(&h) - v.cross(&p);

    let mut mass_matrix = Matrix6::zeros();
    mass_matrix.fixed_view_mut::<3, 3>(0, 0).copy_from(&m11);
    mass_matrix
        .fixed_view_mut::<3, 3>(0, 3)
        .copy_from(&(-coupling));
    mass_matrix.fixed_view_mut::<3, 3>(3, 0).copy_from(&coupling);
    mass_matrix.fixed_view_mut::<3, 3>(3, 3).copy_from(&m22);

    let mut rhs = Vector6::zeros();
    rhs.fixed_rows_mut::<3>(0).copy_from(&rhs_f);
    rhs.fixed_rows_mut::<3>(3).copy_from(&rhs_t);

    let acc = mass_matrix.lu().solve(&rhs).ok_or(NonFiniteState)?;
    let v_new = v + acc.fixed_rows::<3>(0) * dt;
    let w_new = w + acc.fixed_rows::<3>(3) * dt;

    // Pose update uses the already-updated velocities (semi-implicit).
    let lin_vel_world = rot.transform_vector(&v_new);
    let position = state.position + lin_vel_world * dt;
    let mut attitude = rot * quat_exp_map(&(w_new * dt));
    attitude.renormalize();

    let next = BodyState {
        position,
        attitude,
        lin_vel: lin_vel_world,
        ang_vel: w_new,
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(NonFiniteState)
    }
}

/// Unit quaternion for a body-frame rotation vector (exponential map).
fn quat_exp_map(rotvec: &Vector3<f64>) -> UnitQuaternion<f64> {
    let angle = rotvec.norm();
    if angle < 1e-12 {
        // First-order expansion keeps the step exact for tiny rotations.
        let q = Quaternion::new(1.0, rotvec.x * 0.5, rotvec.y * 0.5, rotvec.z * 0.5);
        return UnitQuaternion::from_quaternion(q);
    }
    let half = 0.5 * angle;
    let (s, c) = (libm::sin(half), libm::cos(half));
    let axis = rotvec / angle;
    UnitQuaternion::from_quaternion(Quaternion::new(
        c,
        axis.x * s,
        axis.y * s,
        axis.z * s,
    ))
}

/// Wrap an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut x = a % two_pi;
    if x <= -core::f64::consts::PI {
        x += two_pi;
    } else if x > core::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// Intrinsic ZYX (yaw-pitch-roll) Euler angles of a unit quaternion,
/// returned as (roll, pitch, yaw), each wrapped to (-pi, pi].
///
/// In the gimbal-lock region (|pitch| within ~1e-6 of pi/2) the
/// decomposition is ambiguous; this resolves it by convention as roll = 0
/// with yaw absorbing the remaining rotation.
pub fn quat_to_euler(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let sin_pitch = 2.0 * (w * y - x * z);
    // sin(pi/2 - 1e-6) boundary for the lock convention.
    let lock = libm::sin(core::f64::consts::FRAC_PI_2 - 1e-6);
    if sin_pitch.abs() >= lock {
        let pitch = if sin_pitch > 0.0 {
            core::f64::consts::FRAC_PI_2
        } else {
            -core::f64::consts::FRAC_PI_2
        };
        let yaw = libm::atan2(2.0 * (w * z - x * y), 1.0 - 2.0 * (x * x + z * z));
        return Vector3::new(0.0, pitch, wrap_angle(yaw));
    }
    let roll = libm::atan2(2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y));
    let pitch = libm::asin(sin_pitch.clamp(-1.0, 1.0));
    let yaw = libm::atan2(2.0 * (x * y + w * z), 1.0 - 2.0 * (y * y + z * z));
    Vector3::new(wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw))
}

/// Inverse of [`quat_to_euler`]: build the unit quaternion for intrinsic
/// ZYX angles (roll, pitch, yaw).
pub fn euler_to_quat(euler: &Vector3<f64>) -> UnitQuaternion<f64> {
    let (hr, hp, hy) = (euler.x * 0.5, euler.y * 0.5, euler.z * 0.5);
    let (sr, cr) = (libm::sin(hr), libm::cos(hr));
    let (sp, cp) = (libm::sin(hp), libm::cos(hp));
    let (sy, cy) = (libm::sin(hy), libm::cos(hy));
    UnitQuaternion::from_quaternion(Quaternion::new(
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ))
}

/// Map body-frame angular velocity to ZYX Euler-angle rates at the given
/// attitude.
///
/// The map is singular at gimbal lock; cos(pitch) is floored at 1e-6 in
/// magnitude so the rates saturate instead of overflowing.
pub fn body_rates_to_euler_rates(
    attitude: &UnitQuaternion<f64>,
    ang_vel: &Vector3<f64>,
) -> Vector3<f64> {
    let euler = quat_to_euler(attitude);
    let (sr, cr) = (libm::sin(euler.x), libm::cos(euler.x));
    let cp = libm::cos(euler.y);
    let tp = libm::sin(euler.y) / stabilize(cp);
    let cp = stabilize(cp);
    let (p, q, r) = (ang_vel.x, ang_vel.y, ang_vel.z);
    Vector3::new(
        p + sr * tp * q + cr * tp * r,
        cr * q - sr * r,
        (sr / cp) * q + (cr / cp) * r,
    )
}

fn stabilize(c: f64) -> f64 {
    if c.abs() < 1e-6 {
        if c < 0.0 {
            -1e-6
        } else {
            1e-6
        }
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit_quat(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
        loop {
            let q = Quaternion::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if q.norm() > 1e-3 {
                return UnitQuaternion::from_quaternion(q);
            }
        }
    }

    fn box_vehicle() -> MassProperties {
        MassProperties {
            mass: 13.5,
            com_offset: Vector3::zeros(),
            inertia: Matrix3::from_diagonal(&Vector3::new(0.26, 0.23, 0.37)),
            displaced_volume: 0.0135,
        }
    }

    #[test]
    fn zero_payload_is_identity() {
        let vehicle = box_vehicle();
        let composed = compose_payload(&vehicle, &PayloadSpec::none());
        assert_eq!(composed, vehicle);
    }

    #[test]
    fn com_is_mass_weighted_mean() {
        let vehicle = box_vehicle();
        let payload = PayloadSpec {
            mass: 2.0,
            offset: Vector3::new(0.4, 0.0, 0.0),
        };
        let composed = compose_payload(&vehicle, &payload);
        assert_relative_eq!(composed.com_offset.x, 2.0 * 0.4 / 15.5, epsilon = 1e-15);
        assert_eq!(composed.com_offset.y, 0.0);
        assert_eq!(composed.mass, 15.5);
        assert_eq!(composed.displaced_volume, vehicle.displaced_volume);
    }

    /// Independent oracle: rebuild the vehicle as six point masses that
    /// reproduce its diagonal inertia, append the payload point, and sum
    /// m * (|r|^2 I - r r^T) over all points.
    fn point_mass_inertia_oracle(
        vehicle: &MassProperties,
        payload: &PayloadSpec,
    ) -> Matrix3<f64> {
        let diag = vehicle.inertia.diagonal();
        let (a, b, c) = (diag.x, diag.y, diag.z);
        // Split into pair contributions p = 2m x^2 etc. along each axis.
        let p = 0.5 * (b + c - a);
        let q = 0.5 * (a + c - b);
        let r = 0.5 * (a + b - c);
        assert!(p >= 0.0 && q >= 0.0 && r >= 0.0, "inertia not realizable");
        let m6 = vehicle.mass / 6.0;
        let mut points: Vec<(f64, Vector3<f64>)> = Vec::new();
        let dx = libm::sqrt(p / (2.0 * m6));
        let dy = libm::sqrt(q / (2.0 * m6));
        let dz = libm::sqrt(r / (2.0 * m6));
        for s in [-1.0, 1.0] {
            points.push((m6, Vector3::new(s * dx, 0.0, 0.0)));
            points.push((m6, Vector3::new(0.0, s * dy, 0.0)));
            points.push((m6, Vector3::new(0.0, 0.0, s * dz)));
        }
        points.push((payload.mass, payload.offset));
        let mut total = Matrix3::zeros();
        for (m, r) in points {
            total += m * (Matrix3::identity() * r.norm_squared() - r * r.transpose());
        }
        total
    }

    #[test]
    fn payload_inertia_matches_point_mass_oracle() {
        // Heavy payload case: 7.0 kg at 0.3 m along x.
        let vehicle = box_vehicle();
        let payload = PayloadSpec {
            mass: 7.0,
            offset: Vector3::new(0.3, 0.0, 0.0),
        };
        let composed = compose_payload(&vehicle, &payload);
        let oracle = point_mass_inertia_oracle(&vehicle, &payload);
        for i in 0..3 {
            for j in 0..3 {
                let expect = oracle[(i, j)];
                let got = composed.inertia[(i, j)];
                let scale = expect.abs().max(1.0);
                assert!(
                    (got - expect).abs() / scale < 1e-6,
                    "inertia[{i}{j}] {got} vs oracle {expect}"
                );
            }
        }
    }

    #[test]
    fn payload_composition_is_order_independent() {
        let vehicle = box_vehicle();
        let a = PayloadSpec {
            mass: 1.7,
            offset: Vector3::new(0.1, -0.2, 0.05),
        };
        let b = PayloadSpec {
            mass: 4.2,
            offset: Vector3::new(-0.3, 0.12, -0.08),
        };
        let ab = compose_payload(&compose_payload(&vehicle, &a), &b);
        let ba = compose_payload(&compose_payload(&vehicle, &b), &a);
        assert_relative_eq!(ab.mass, ba.mass, epsilon = 1e-12);
        assert_relative_eq!(ab.com_offset, ba.com_offset, epsilon = 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(ab.inertia[(i, j)], ba.inertia[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn equilibrium_state_is_preserved() {
        let vehicle = box_vehicle();
        let state = BodyState::at_rest(Vector3::new(1.0, 2.0, -0.5));
        let next = integrate_step(&state, &Wrench::zero(), &vehicle, 0.05).unwrap();
        assert_eq!(next.position, state.position);
        assert_eq!(next.lin_vel, state.lin_vel);
        assert_eq!(next.ang_vel, state.ang_vel);
        assert_relative_eq!(next.attitude.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn integration_is_deterministic() {
        let vehicle = box_vehicle();
        let mut state = BodyState::at_rest(Vector3::zeros());
        state.ang_vel = Vector3::new(0.3, -0.2, 0.9);
        state.lin_vel = Vector3::new(0.5, 0.1, -0.4);
        let wrench = Wrench {
            force: Vector3::new(3.0, -1.0, 2.0),
            torque: Vector3::new(0.2, 0.4, -0.1),
        };
        let a = integrate_step(&state, &wrench, &vehicle, 0.05).unwrap();
        let b = integrate_step(&state, &wrench, &vehicle, 0.05).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(a.attitude, b.attitude);
        assert_eq!(a.lin_vel, b.lin_vel);
        assert_eq!(a.ang_vel, b.ang_vel);
    }

    #[test]
    fn ballistic_richardson_check() {
        // Constant surge force, no rotation: velocity is exact, position
        // error halves when dt halves.
        let vehicle = box_vehicle();
        let force = 10.0;
        let t_final = 2.0;
        let wrench = Wrench {
            force: Vector3::new(force, 0.0, 0.0),
            torque: Vector3::zeros(),
        };
        let run = |dt: f64| {
            let steps = (t_final / dt) as usize;
            let mut state = BodyState::at_rest(Vector3::zeros());
            for _ in 0..steps {
                state = integrate_step(&state, &wrench, &vehicle, dt).unwrap();
            }
            state
        };
        let exact_v = force * t_final / vehicle.mass;
        let exact_x = 0.5 * force * t_final * t_final / vehicle.mass;
        let coarse = run(0.05);
        let fine = run(0.025);
        assert_relative_eq!(coarse.lin_vel.x, exact_v, epsilon = 1e-9);
        let err_coarse = (coarse.position.x - exact_x).abs();
        let err_fine = (fine.position.x - exact_x).abs();
        assert!(err_fine < 0.6 * err_coarse, "{err_fine} !<< {err_coarse}");
    }

    #[test]
    fn torque_free_principal_spin_conserves_momentum() {
        let vehicle = box_vehicle();
        let spin = 0.8;
        let mut state = BodyState::at_rest(Vector3::zeros());
        state.ang_vel = Vector3::new(0.0, 0.0, spin);
        let h0 = (vehicle.inertia * state.ang_vel).norm();
        // Reference trajectory at dt/100 for the same horizon.
        let mut fine = state;
        for _ in 0..1000 {
            state = integrate_step(&state, &Wrench::zero(), &vehicle, 0.05).unwrap();
        }
        for _ in 0..100_000 {
            fine = integrate_step(&fine, &Wrench::zero(), &vehicle, 0.0005).unwrap();
        }
        let h_coarse = (vehicle.inertia * state.ang_vel).norm();
        let h_fine = (vehicle.inertia * fine.ang_vel).norm();
        assert!((h_coarse - h0).abs() < 1e-6, "coarse momentum drift");
        assert!((h_fine - h0).abs() < 1e-6, "fine momentum drift");
        assert!((h_coarse - h_fine).abs() < 1e-6);
    }

    #[test]
    fn attitude_norm_stays_unit_over_many_steps() {
        // Driven, damped tumbling keeps the rates bounded for the long run.
        let vehicle = box_vehicle();
        let mut state = BodyState::at_rest(Vector3::zeros());
        state.ang_vel = Vector3::new(0.4, -0.7, 0.3);
        let mut worst: f64 = 0.0;
        for k in 0..100_000u32 {
            let bias = Vector3::new(
                0.05 * libm::sin(k as f64 * 0.01),
                -0.03,
                0.04 * libm::cos(k as f64 * 0.003),
            );
            let wrench = Wrench {
                force: Vector3::zeros(),
                torque: bias - state.ang_vel * 1.0,
            };
            state = integrate_step(&state, &wrench, &vehicle, 0.05).unwrap();
            worst = worst.max((state.attitude.norm() - 1.0).abs());
        }
        assert!(worst < 1e-9, "per-step norm error {worst}");
        assert!((state.attitude.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn euler_identity_and_axis_cases() {
        let e = quat_to_euler(&UnitQuaternion::identity());
        assert_eq!(e, Vector3::zeros());
        let q = euler_to_quat(&Vector3::new(0.0, 0.0, core::f64::consts::FRAC_PI_2));
        let e = quat_to_euler(&q);
        assert_relative_eq!(e.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(e.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(e.z, core::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trip_on_random_quaternions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = random_unit_quat(&mut rng);
            let back = euler_to_quat(&quat_to_euler(&q));
            // Same rotation up to quaternion sign.
            let dot = q.w * back.w + q.i * back.i + q.j * back.j + q.k * back.k;
            assert!((dot.abs() - 1.0).abs() < 1e-9, "round trip dot {dot}");
        }
    }

    #[test]
    fn gimbal_lock_uses_zero_roll_convention() {
        let q = euler_to_quat(&Vector3::new(0.4, core::f64::consts::FRAC_PI_2, 1.1));
        let e = quat_to_euler(&q);
        assert_eq!(e.x, 0.0);
        assert_relative_eq!(e.y, core::f64::consts::FRAC_PI_2, epsilon = 1e-9);
        // Roll folds into yaw at the singularity; the rotation matches.
        let back = euler_to_quat(&e);
        let dot = q.w * back.w + q.i * back.i + q.j * back.j + q.k * back.k;
        assert!((dot.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_is_half_open() {
        assert_eq!(wrap_angle(core::f64::consts::PI), core::f64::consts::PI);
        assert_relative_eq!(
            wrap_angle(-core::f64::consts::PI),
            core::f64::consts::PI,
            epsilon = 1e-12
        );
        assert_relative_eq!(wrap_angle(3.0 * core::f64::consts::PI), core::f64::consts::PI);
        assert_relative_eq!(wrap_angle(0.1), 0.1);
    }

    #[test]
    fn euler_rates_match_body_rates_at_identity() {
        let rates = body_rates_to_euler_rates(
            &UnitQuaternion::identity(),
            &Vector3::new(0.1, -0.2, 0.3),
        );
        assert_relative_eq!(rates, Vector3::new(0.1, -0.2, 0.3), epsilon = 1e-12);
    }

    #[test]
    fn mass_properties_validation() {
        let mut props = box_vehicle();
        assert!(props.validate().is_ok());
        props.mass = -1.0;
        assert_eq!(props.validate(), Err(MassPropertiesError::NonPositiveMass));
        let mut props = box_vehicle();
        props.inertia[(0, 1)] = 1e-3;
        assert_eq!(props.validate(), Err(MassPropertiesError::AsymmetricInertia));
        let mut props = box_vehicle();
        props.inertia = Matrix3::from_diagonal(&Vector3::new(-0.1, 0.2, 0.2));
        assert_eq!(
            props.validate(),
            Err(MassPropertiesError::NonPositiveDefiniteInertia)
        );
    }
}
