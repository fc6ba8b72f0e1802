//! Default BlueROV2 Heavy parameter set.
//!
//! Geometry follows the vendor's vectored 8-thruster arrangement: four
//! horizontal thrusters canted 45 degrees at the hull corners and four
//! vertical thrusters outboard. Mass and inertia are taken from published
//! vehicle data; hydrodynamic coefficients are unvalidated
//! order-of-magnitude defaults sized so full forward thrust tops out near
//! 1 m/s surge. Everything here can be overridden from configuration.
//!
//! Body frame: x forward, y left, z up. All thrusters sit in the z = 0
//! plane so symmetric surge and heave commands produce no parasitic
//! torque.

use crate::actuation::{Thruster, ThrusterLayout};
use crate::hydro::HydroParams;
use crate::rigidbody::MassProperties;
use nalgebra::{Matrix3, Vector3};

/// Vehicle mass, kg.
pub const MASS: f64 = 13.5;
/// Peak thrust per thruster at full command, N.
pub const MAX_THRUST: f64 = 35.0;
/// Rotor speed at full command, rad/s.
pub const MAX_ROTOR_SPEED: f64 = 400.0;
/// Thrust coefficient calibrated so F(MAX_ROTOR_SPEED) = MAX_THRUST.
pub const THRUST_COEFF: f64 = MAX_THRUST / (MAX_ROTOR_SPEED * MAX_ROTOR_SPEED);

pub fn mass_properties() -> MassProperties {
    MassProperties {
        mass: MASS,
        com_offset: Vector3::zeros(),
        inertia: Matrix3::from_diagonal(&Vector3::new(0.26, 0.23, 0.37)),
        // Neutral buoyancy in fresh-ish water at 1000 kg/m^3.
        displaced_volume: MASS / 1000.0,
    }
}

pub fn hydro_params() -> HydroParams {
    HydroParams {
        box_dims: Vector3::new(0.457, 0.575, 0.254),
        fluid_density: 1000.0,
        // Sized for ~1 m/s terminal surge under the ~99 N full vectored
        // forward thrust: 90 * 1^2 + 9 * 1 = 99.
        lin_damping: [9.0, 15.0, 20.0, 1.5, 1.5, 2.0],
        quad_damping: [90.0, 130.0, 180.0, 3.0, 3.0, 5.0],
        cob_offset: Vector3::new(0.0, 0.0, 0.02),
        added_mass_coef: 0.2,
        added_inertia_coef: 0.1,
        bias_wrench: [0.0; 6],
    }
}

pub fn thruster_layout() -> ThrusterLayout {
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    let h = |x: f64, y: f64, ax: f64, ay: f64| Thruster {
        position: Vector3::new(x, y, 0.0),
        axis: Vector3::new(ax * inv_sqrt2, ay * inv_sqrt2, 0.0),
        max_rotor_speed: MAX_ROTOR_SPEED,
        thrust_coeff: THRUST_COEFF,
    };
    let v = |x: f64, y: f64| Thruster {
        position: Vector3::new(x, y, 0.0),
        axis: Vector3::new(0.0, 0.0, 1.0),
        max_rotor_speed: MAX_ROTOR_SPEED,
        thrust_coeff: THRUST_COEFF,
    };
    ThrusterLayout {
        thrusters: [
            // Horizontal vectored pairs; positive command pushes forward.
            h(0.156, -0.111, 1.0, 1.0),  // front right
            h(0.156, 0.111, 1.0, -1.0),  // front left
            h(-0.156, -0.111, 1.0, -1.0), // rear right
            h(-0.156, 0.111, 1.0, 1.0),  // rear left
            // Vertical thrusters; positive command pushes up.
            v(0.120, -0.218), // front right
            v(0.120, 0.218),  // front left
            v(-0.120, -0.218), // rear right
            v(-0.120, 0.218), // rear left
        ],
    }
}
