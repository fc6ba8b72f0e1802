//! Orchestration around `dockrl-core`: run configuration with named
//! presets, parallel rollout collection, training and evaluation drivers,
//! checkpoint files, CSV logs, and chart generation.

pub mod batch;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod evalrun;
pub mod matrix;
pub mod plot;
pub mod trainer;
