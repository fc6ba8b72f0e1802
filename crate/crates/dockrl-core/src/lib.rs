//! Core simulation and learning stack for underwater-vehicle docking:
//! quaternion rigid-body dynamics with payload composition, inertia-box
//! hydrodynamics, the 8-thruster actuation chain, the docking MDP, and a
//! self-contained PPO learner.
//!
//! Everything here is pure computation over explicit state: no I/O, no
//! global state, no clocks. Determinism is part of the contract — identical
//! seeds and configurations give bit-identical trajectories and updates.
//! File formats, configuration, and the CLI live in the companion `dockrl`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod actuation;
pub mod bluerov;
pub mod envdock;
pub mod hydro;
pub mod learner;
pub mod rigidbody;

pub use rand_chacha::ChaCha8Rng;
