//! Synthetic darkroom: procedural scenes, scripted lighting, a parametric
//! sensor model, and the episodic exposure-control environment.

mod camera;
mod env;
pub(crate) mod episode;
mod lighting;
mod scene;

pub use camera::{render, CameraModel, ExposureParams};
pub use env::{sample_augmentation, DarkroomEnv, EnvConfig};
pub use lighting::{
    illuminance_at, read_scenario_pack, sample_scenario, write_scenario_pack, Difficulty,
    EvalScenario, LightingScenario, ScenarioKind,
};
pub use scene::{Scene, SceneKind};

/// Dimmest representable illuminance.
pub const L_MIN: f64 = 0.01;
/// Brightest representable illuminance.
pub const L_MAX: f64 = 100.0;
/// Steps per episode.
pub const EPISODE_LEN: usize = 200;
