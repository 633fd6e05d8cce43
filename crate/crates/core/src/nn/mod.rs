//! Minimal neural toolkit: batched MLP with hand-written backprop, Adam,
//! target-network smoothing, the squashed-Gaussian policy head, and a binary
//! checkpoint format.
//!
//! Everything is generic over the float width: training runs comfortably in
//! `f32`, while gradient verification uses `f64`.

mod adam;
mod checkpoint;
mod mlp;
mod policy;

pub use adam::{Adam, ScalarAdam};
pub use checkpoint::{load_mlp, read_mlp, save_mlp, write_mlp};
pub use mlp::{ForwardCache, Grads, Mlp};
pub use policy::{
    deterministic_action, entropy_estimate, log_prob_given, sample_squashed, split_head,
    SquashedSample, LOG_STD_MAX, LOG_STD_MIN,
};

use rand::Rng;
use rand_distr::StandardNormal;

/// Float width the toolkit operates in.
pub trait Element:
    num_traits::Float
    + num_traits::NumAssignOps
    + ndarray::ScalarOperand
    + ndarray::LinalgScalar
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn std_normal<R: Rng>(rng: &mut R) -> Self;
    fn uniform<R: Rng>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

impl Element for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn std_normal<R: Rng>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform<R: Rng>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.gen_range(lo..hi)
    }
}

impl Element for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn std_normal<R: Rng>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform<R: Rng>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.gen_range(lo..hi)
    }
}
