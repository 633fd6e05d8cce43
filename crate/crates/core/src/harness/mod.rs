//! Evaluation harness: convergence metrics, controller interfaces, episode
//! reports, comparison sweeps, latency measurement, and run configuration.

mod config;
mod controllers;
mod convergence;
mod eval;
mod latency;

pub use config::LabConfig;
pub use controllers::{
    BuiltinAeController, ControlRequest, Controller, DrlController, NelderMeadController,
    RandomController,
};
pub use convergence::{
    converged_fraction, convergence_index, convergence_percentile, frames_to_converge,
    percentile, DEFAULT_EPSILON,
};
pub use eval::{
    compare, run_episode_eval, EpisodeDriver, EpisodeReport, COMPARE_CSV_HEADER, NOT_CONVERGED,
};
pub use latency::{bench_latency, LatencyReport, LatencyStats};
