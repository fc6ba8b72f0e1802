//! Thruster chain: normalized commands to rotor speeds (zero-order, no
//! latency), rotor speeds to signed-quadratic forces, forces to an
//! aggregate body wrench through the 8-thruster layout.
//!
//! Commands are normalized to [-1, 1]. The hardware mapping is fixed as
//! `pwm = 1500 + 400 * cmd` microseconds (1100..1900, 1500 neutral); only
//! normalized commands cross module boundaries.

use crate::rigidbody::Wrench;
use alloc::vec::Vec;
use nalgebra::{SMatrix, Vector3};

pub const NUM_THRUSTERS: usize = 8;

/// One thruster: mounting point, thrust direction, and rotor model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thruster {
    /// Mounting position in the body frame, meters.
    pub position: Vector3<f64>,
    /// Unit thrust axis in the body frame.
    pub axis: Vector3<f64>,
    /// Rotor speed at full command, rad/s.
    pub max_rotor_speed: f64,
    /// Thrust coefficient C_T in F = C_T * w * |w|, N s^2 / rad^2. Forward
    /// and reverse share one coefficient; real propellers are weaker in
    /// reverse, so a separate reverse coefficient is the natural extension
    /// point.
    pub thrust_coeff: f64,
}

/// The full 8-thruster layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrusterLayout {
    pub thrusters: [Thruster; NUM_THRUSTERS],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayoutError {
    NonUnitAxis { index: usize, norm: f64 },
    DeficientRank { rank: usize },
}

impl core::fmt::Display for LayoutError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NonUnitAxis { index, norm } => {
                write!(f, "thruster {index} axis has norm {norm}, expected 1")
            }
            Self::DeficientRank { rank } => {
                write!(f, "thruster layout wrench map has rank {rank}, expected 6")
            }
        }
    }
}

impl core::error::Error for LayoutError {}

/// Normalized per-thruster command vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionCommand(pub [f64; NUM_THRUSTERS]);

impl ActionCommand {
    pub fn clamped(&self) -> ActionCommand {
        let mut out = self.0;
        for v in &mut out {
            *v = v.clamp(-1.0, 1.0);
        }
        ActionCommand(out)
    }
}

impl ThrusterLayout {
    /// Check axis normalization and full 6-DOF controllability.
    pub fn validate(&self) -> Result<(), LayoutError> {
        for (index, t) in self.thrusters.iter().enumerate() {
            let norm = t.axis.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(LayoutError::NonUnitAxis { index, norm });
            }
        }
        let rank = self.wrench_map_rank(1e-9);
        if rank != 6 {
            return Err(LayoutError::DeficientRank { rank });
        }
        Ok(())
    }

    /// Columns map per-thruster force magnitude to (force, torque).
    pub fn wrench_matrix(&self) -> SMatrix<f64, 6, 8> {
        let mut b = SMatrix::<f64, 6, 8>::zeros();
        for (i, t) in self.thrusters.iter().enumerate() {
            let torque = t.position.cross(&t.axis);
            for r in 0..3 {
                b[(r, i)] = t.axis[r];
                b[(r + 3, i)] = torque[r];
            }
        }
        b
    }

    pub fn wrench_map_rank(&self, eps: f64) -> usize {
        let svd = self.wrench_matrix().svd(false, false);
        let max = svd.singular_values.max();
        svd.singular_values
            .iter()
            .filter(|s| **s > eps * max.max(1.0))
            .count()
    }
}

/// Zero-order rotor model: speed tracks the command instantaneously.
pub fn command_to_rotor_speed(cmd: &ActionCommand, layout: &ThrusterLayout) -> [f64; NUM_THRUSTERS] {
    let clamped = cmd.clamped();
    let mut out = [0.0; NUM_THRUSTERS];
    for i in 0..NUM_THRUSTERS {
        out[i] = clamped.0[i] * layout.thrusters[i].max_rotor_speed;
    }
    out
}

/// Signed-quadratic steady-state thrust law: F = C_T * w * |w|.
pub fn rotor_force(omega: f64, thrust_coeff: f64) -> f64 {
    thrust_coeff * omega * omega.abs()
}

/// Total body wrench for a command: sum of per-thruster axis forces and
/// their moments about the body origin, evaluated through the precomputed
/// wrench matrix.
pub fn body_wrench(cmd: &ActionCommand, layout: &ThrusterLayout) -> Wrench {
    let omegas = command_to_rotor_speed(cmd, layout);
    let forces: Vec<f64> = omegas
        .iter()
        .zip(&layout.thrusters)
        .map(|(w, t)| rotor_force(*w, t.thrust_coeff))
        .collect();
    let b = layout.wrench_matrix();
    let mut out = [0.0; 6];
    for (i, f) in forces.iter().enumerate() {
        for r in 0..6 {
            out[r] += b[(r, i)] * f;
        }
    }
    Wrench {
        force: Vector3::new(out[0], out[1], out[2]),
        torque: Vector3::new(out[3], out[4], out[5]),
    }
}

/// Documented hardware mapping from a normalized command to PWM microseconds.
pub fn command_to_pwm(cmd: f64) -> f64 {
    1500.0 + 400.0 * cmd.clamp(-1.0, 1.0)
}
