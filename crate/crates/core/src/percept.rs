//! Observation and reward mathematics: column-averaged intensity profiles,
//! the stacked state window, and the three-term exposure reward.

use crate::error::{LabError, Result};
use crate::imaging::{resize_linear_1d, sobel_mean, Image, RoiSpec};

/// Length of one intensity profile.
pub const PROFILE_LEN: usize = 128;
/// Number of stacked profiles in a state (current frame plus three past).
pub const HISTORY_LEN: usize = 4;
/// Total state dimension.
pub const STATE_LEN: usize = PROFILE_LEN * HISTORY_LEN;

/// Column-averaged brightness profile of one frame's RoI, resampled to
/// [`PROFILE_LEN`] entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityVector(Vec<f64>);

impl IntensityVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Agent observation: [`HISTORY_LEN`] intensity profiles, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Seeds the history by repeating one profile, as done right after an
    /// episode reset when no earlier frames exist.
    pub fn seeded(v: &IntensityVector) -> Self {
        let mut values = Vec::with_capacity(STATE_LEN);
        for _ in 0..HISTORY_LEN {
            values.extend_from_slice(v.as_slice());
        }
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Drops the oldest profile and appends `v` at the newest position.
pub fn push_state(history: &StateVector, v: &IntensityVector) -> StateVector {
    let mut values = Vec::with_capacity(STATE_LEN);
    values.extend_from_slice(&history.0[PROFILE_LEN..]);
    values.extend_from_slice(v.as_slice());
    StateVector(values)
}

/// Crops the RoI, averages each column over the vertical axis, and linearly
/// resamples the resulting profile to [`PROFILE_LEN`] entries.
pub fn vectorize_intensity(img: &Image, roi: &RoiSpec) -> Result<IntensityVector> {
    Ok(vectorize_patch(&img.crop(roi)?))
}

/// [`vectorize_intensity`] over an already-cropped patch.
pub fn vectorize_patch(patch: &Image) -> IntensityVector {
    let (h, w) = (patch.height(), patch.width());
    let mut profile = vec![0.0; w];
    for r in 0..h {
        for (acc, &p) in profile.iter_mut().zip(patch.row(r)) {
            *acc += p;
        }
    }
    for acc in &mut profile {
        *acc /= h as f64;
    }
    IntensityVector(resize_linear_1d(&profile, PROFILE_LEN))
}

/// How the mid-tone term enters the total reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanTermForm {
    /// Score `1 - distance`, so a positive weight rewards mid-tone frames.
    #[default]
    Closeness,
    /// Apply the weight to the raw distance itself.
    Literal,
}

/// Weights and constants of the exposure reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    /// Target mid-tone brightness.
    pub m: f64,
    /// Exponent shaping the mid-tone distance.
    pub p_m: f64,
    /// Mid-tone term weight.
    pub w_m: f64,
    /// Flicker term weight.
    pub w_f: f64,
    /// Noise term weight.
    pub w_n: f64,
    pub mean_term_form: MeanTermForm,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            m: 0.5,
            p_m: 0.5,
            w_m: 1.5,
            w_f: -1.0,
            w_n: -0.1,
            mean_term_form: MeanTermForm::Closeness,
        }
    }
}

/// Mean over pixels of `|I - M|^p_m`; zero iff the frame sits exactly at the
/// mid-tone target.
pub fn r_mean_dist(img: &Image, cfg: &RewardConfig) -> f64 {
    let sum: f64 = img.pixels().iter().map(|p| (p - cfg.m).abs().powf(cfg.p_m)).sum();
    sum / img.pixels().len() as f64
}

/// Mean absolute per-pixel difference between consecutive frames.
pub fn r_flk(img_t: &Image, img_prev: &Image) -> Result<f64> {
    if img_t.height() != img_prev.height() || img_t.width() != img_prev.width() {
        return Err(LabError::Dimension(format!(
            "flicker term needs equal frames, got {}x{} vs {}x{}",
            img_t.height(),
            img_t.width(),
            img_prev.height(),
            img_prev.width()
        )));
    }
    let sum: f64 = img_t
        .pixels()
        .iter()
        .zip(img_prev.pixels())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / img_t.pixels().len() as f64)
}

/// Mean Sobel gradient magnitude of the frame.
pub fn r_noise(img: &Image) -> Result<f64> {
    sobel_mean(img)
}

/// Weighted sum of the three terms for one frame transition.
pub fn r_total(img_t: &Image, img_prev: &Image, cfg: &RewardConfig) -> Result<f64> {
    let mean_term = match cfg.mean_term_form {
        MeanTermForm::Closeness => 1.0 - r_mean_dist(img_t, cfg),
        MeanTermForm::Literal => r_mean_dist(img_t, cfg),
    };
    Ok(cfg.w_m * mean_term + cfg.w_f * r_flk(img_t, img_prev)? + cfg.w_n * r_noise(img_t)?)
}

/// Single-frame variant used where no predecessor exists: the flicker term
/// is omitted and the remaining weights are unchanged.
pub fn r_single_frame(img: &Image, cfg: &RewardConfig) -> Result<f64> {
    let mean_term = match cfg.mean_term_form {
        MeanTermForm::Closeness => 1.0 - r_mean_dist(img, cfg),
        MeanTermForm::Literal => r_mean_dist(img, cfg),
    };
    Ok(cfg.w_m * mean_term + cfg.w_n * r_noise(img)?)
}
