//! Camera exposure control laboratory.
//!
//! A synthetic darkroom stands in for a physical test bench: procedural
//! scenes are lit by scripted scenarios and photographed through a
//! parametric sensor model. A soft actor-critic agent, a surrogate built-in
//! auto-exposure controller, and a Nelder-Mead search each drive the
//! camera's exposure time and gain; the harness measures how fast and how
//! stably each one reaches a well-exposed image.

pub mod baselines;
pub mod camsim;
pub mod dataset_env;
pub mod error;
pub mod harness;
pub mod imaging;
pub mod nn;
pub mod par;
pub mod percept;
pub mod sac;

pub use error::{LabError, Result};
