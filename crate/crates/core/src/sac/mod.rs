//! Soft actor-critic exposure agent: action mapping, replay storage,
//! difficulty curriculum, network updates, and the training loop.

mod agent;
mod curriculum;
mod replay;
mod trainer;

pub use agent::{alpha_grad, alpha_loss, SacAgent, SacConfig, UpdateStats};
pub use curriculum::{CurriculumMode, CurriculumSchedule};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use trainer::{
    train, write_training_log, EpisodeLogRow, EvalLogRow, TrainOutput, TrainSetup,
};

use crate::camsim::ExposureParams;

/// Relative exposure adjustment, each component in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub a_exposure: f64,
    pub a_gain: f64,
}

impl Action {
    /// Builds an action, clamping both components into `[-1, 1]`.
    pub fn clamped(a_exposure: f64, a_gain: f64) -> Self {
        Self { a_exposure: a_exposure.clamp(-1.0, 1.0), a_gain: a_gain.clamp(-1.0, 1.0) }
    }

    pub const ZERO: Action = Action { a_exposure: 0.0, a_gain: 0.0 };
}

/// Largest per-step change an action of magnitude one can request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionScale {
    /// Exposure-time multiplier at full positive action.
    pub exposure_factor: f64,
    /// Gain change in dB at full positive action.
    pub gain_step_db: f64,
}

impl Default for ActionScale {
    fn default() -> Self {
        // A x3 exposure step traverses the full 0.05..100 ms range in about
        // seven steps; +-6 dB does the same for 0..40 dB.
        Self { exposure_factor: 3.0, gain_step_db: 6.0 }
    }
}

/// Applies a relative action: exposure time scales by
/// `exposure_factor^a_exposure`, gain moves by `gain_step_db * a_gain`,
/// both clamped to the parameter bounds.
pub fn apply_action(params: ExposureParams, a: Action, scale: &ActionScale) -> ExposureParams {
    let t = params.exposure_time_ms * (a.a_exposure * scale.exposure_factor.ln()).exp();
    let g = params.gain_db + scale.gain_step_db * a.a_gain;
    ExposureParams::clamped(t, g)
}
