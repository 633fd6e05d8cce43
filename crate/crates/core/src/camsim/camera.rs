//! Parametric image formation: linear signal, shot noise, analog gain,
//! read noise, clipping, and optional quantization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::{L_MAX, L_MIN};
use crate::error::{LabError, Result};
use crate::imaging::Image;
use crate::par;

/// The controlled quantities: integration time and analog gain, hard-bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureParams {
    pub exposure_time_ms: f64,
    pub gain_db: f64,
}

impl ExposureParams {
    pub const EXPOSURE_MIN_MS: f64 = 0.05;
    pub const EXPOSURE_MAX_MS: f64 = 100.0;
    pub const GAIN_MIN_DB: f64 = 0.0;
    pub const GAIN_MAX_DB: f64 = 40.0;

    /// Builds parameters, rejecting values outside the hard bounds.
    pub fn new(exposure_time_ms: f64, gain_db: f64) -> Result<Self> {
        if !(Self::EXPOSURE_MIN_MS..=Self::EXPOSURE_MAX_MS).contains(&exposure_time_ms) {
            return Err(LabError::Domain(format!(
                "exposure time {exposure_time_ms} ms outside [{}, {}]",
                Self::EXPOSURE_MIN_MS,
                Self::EXPOSURE_MAX_MS
            )));
        }
        if !(Self::GAIN_MIN_DB..=Self::GAIN_MAX_DB).contains(&gain_db) {
            return Err(LabError::Domain(format!(
                "gain {gain_db} dB outside [{}, {}]",
                Self::GAIN_MIN_DB,
                Self::GAIN_MAX_DB
            )));
        }
        Ok(Self { exposure_time_ms, gain_db })
    }

    /// Builds parameters, clamping both values into bounds.
    pub fn clamped(exposure_time_ms: f64, gain_db: f64) -> Self {
        Self {
            exposure_time_ms: exposure_time_ms
                .clamp(Self::EXPOSURE_MIN_MS, Self::EXPOSURE_MAX_MS),
            gain_db: gain_db.clamp(Self::GAIN_MIN_DB, Self::GAIN_MAX_DB),
        }
    }

    /// Uniform random parameters within bounds.
    pub fn sample_uniform<R: Rng>(rng: &mut R) -> Self {
        Self {
            exposure_time_ms: rng.gen_range(Self::EXPOSURE_MIN_MS..=Self::EXPOSURE_MAX_MS),
            gain_db: rng.gen_range(Self::GAIN_MIN_DB..=Self::GAIN_MAX_DB),
        }
    }

    /// Linear amplification factor `10^(gain_db / 20)`.
    pub fn gain_linear(&self) -> f64 {
        10f64.powf(self.gain_db / 20.0)
    }
}

/// Sensor response parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Exposure time that maps unit radiance to unit signal (ms).
    pub t_ref_ms: f64,
    /// Effective photoelectron capacity; shot-noise variance is
    /// `signal / full_well`. Use infinity to disable shot noise.
    pub full_well: f64,
    /// Read-noise standard deviation in normalized intensity units,
    /// amplified by the linear gain.
    pub read_noise_sigma: f64,
    /// Output quantization depth in bits; 0 leaves values continuous.
    pub quantize_bits: u8,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self { t_ref_ms: 10.0, full_well: 10_000.0, read_noise_sigma: 0.002, quantize_bits: 8 }
    }
}

impl CameraModel {
    /// Noise-free, unquantized variant used by oracles and fixed-point tests.
    pub fn noiseless() -> Self {
        Self { t_ref_ms: 10.0, full_well: f64::INFINITY, read_noise_sigma: 0.0, quantize_bits: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_ref_ms > 0.0) || !(self.full_well > 0.0) || self.read_noise_sigma < 0.0 {
            return Err(LabError::Domain(format!(
                "camera model out of domain: t_ref {} ms, full well {}, read noise {}",
                self.t_ref_ms, self.full_well, self.read_noise_sigma
            )));
        }
        Ok(())
    }

    fn has_shot_noise(&self) -> bool {
        self.full_well.is_finite()
    }
}

/// Photographs `scene` under illuminance `l`.
///
/// Per pixel: signal `e = reflectance * l * (t / t_ref)`, shot noise with
/// variance `e / full_well`, then gain `G` amplifies signal plus noise, read
/// noise of sigma `read_noise_sigma * G` is added, and the result is clipped
/// to `[0, 1]` and optionally quantized.
///
/// Consumes exactly one draw from `rng` to key the per-row noise streams, so
/// caller streams stay aligned regardless of the noise configuration.
pub fn render(
    scene: &Scene,
    l: f64,
    params: ExposureParams,
    cam: &CameraModel,
    rng: &mut ChaCha8Rng,
) -> Result<Image> {
    if !(L_MIN..=L_MAX).contains(&l) {
        return Err(LabError::Domain(format!(
            "illuminance {l} outside [{L_MIN}, {L_MAX}]"
        )));
    }
    cam.validate()?;
    let noise_key: u64 = rng.gen();
    let gain = params.gain_linear();
    let exposure_ratio = params.exposure_time_ms / cam.t_ref_ms;
    let read_sigma = cam.read_noise_sigma * gain;
    let shot = cam.has_shot_noise();
    let quant_levels = if cam.quantize_bits > 0 {
        Some(((1u32 << cam.quantize_bits) - 1) as f64)
    } else {
        None
    };
    let refl = &scene.reflectance;
    let rows = par::map_indexed(refl.height(), |r| {
        let mut row_rng = ChaCha8Rng::seed_from_u64(noise_key);
        row_rng.set_stream(r as u64);
        let mut out = Vec::with_capacity(refl.width());
        for &albedo in refl.row(r) {
            let e = albedo * l * exposure_ratio;
            let mut v = e;
            if shot && e > 0.0 {
                let z: f64 = row_rng.sample(StandardNormal);
                v += z * (e / cam.full_well).sqrt();
            }
            v *= gain;
            if read_sigma > 0.0 {
                let z: f64 = row_rng.sample(StandardNormal);
                v += z * read_sigma;
            }
            v = v.clamp(0.0, 1.0);
            if let Some(levels) = quant_levels {
                v = (v * levels).round() / levels;
            }
            out.push(v);
        }
        out
    });
    Image::new(refl.height(), refl.width(), rows.concat())
}
