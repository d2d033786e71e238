//! Dynamic induction control of a floating wind turbine.
//!
//! A two-dimensional free-vortex actuator-disc wake is coupled both ways to
//! a linear pitch/surge platform. Rollouts of the coupled model are
//! differentiated exactly in reverse mode, which drives a receding-horizon
//! economic MPC. Frequency-response tooling characterises the coupled
//! dynamics.
//!
//! Module map:
//! - [`config`]: parameter ingestion and validation
//! - [`wake`]: vortex-point wake, induced velocities, thrust and power
//! - [`platform`]: platform state space and zero-order-hold discretisation
//! - [`coupled`]: two-rate wake/platform stepping and rollouts
//! - [`objective`]: horizon cost and its reverse-mode gradient
//! - [`empc`]: Adam and the receding-horizon loop
//! - [`analysis`]: chirps, DFT, FRF estimation, sweeps and spectra
//! - [`cli`]: command implementations and file exports

pub mod analysis;
pub mod cli;
pub mod config;
pub mod coupled;
pub mod empc;
pub mod export;
pub mod objective;
pub mod platform;
pub mod wake;

use thiserror::Error;

/// Planar vector in metres or metres per second.
pub type Vec2 = nalgebra::Vector2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("induction factor {0} outside the admissible range [0, 1)")]
    InductionDomain(f64),
    #[error("non-finite {what} at step {step}")]
    NonFinite { what: &'static str, step: usize },
    #[error("{0}")]
    InvalidInput(String),
}

pub use config::{PlatformMode, SimConfig};
pub use coupled::{CoupledModel, CoupledState, StepOutput};
pub use objective::{ControlSequence, GradientRecord, ObjectiveWeights};
pub use platform::{DiscretePlatform, PlatformState};
pub use wake::{VortexPoint, WakeState};
