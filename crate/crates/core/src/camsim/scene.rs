//! Procedural reflectance targets standing in for physical test objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::imaging::Image;

/// Procedural generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Uniform,
    Ramp,
    Checker,
    ValueNoise,
    Shapes,
}

impl SceneKind {
    pub const ALL: [SceneKind; 5] = [
        SceneKind::Uniform,
        SceneKind::Ramp,
        SceneKind::Checker,
        SceneKind::ValueNoise,
        SceneKind::Shapes,
    ];

    /// Uniformly random generator family.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SceneKind::Uniform => "uniform",
            SceneKind::Ramp => "ramp",
            SceneKind::Checker => "checker",
            SceneKind::ValueNoise => "value_noise",
            SceneKind::Shapes => "shapes",
        }
    }
}

impl std::str::FromStr for SceneKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        SceneKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Format(format!("unknown scene kind {s:?}")))
    }
}

/// A target object: an albedo raster plus the recipe that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Albedo in `[0, 1]` per pixel.
    pub reflectance: Image,
    /// Generator and seed for regeneration; `None` for hand-built rasters.
    pub recipe: Option<(SceneKind, u64)>,
}

impl Scene {
    /// Deterministically generates a scene; the same `(kind, seed)` and
    /// dimensions always reproduce the identical raster.
    pub fn generate(kind: SceneKind, seed: u64, height: usize, width: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reflectance = match kind {
            SceneKind::Uniform => uniform(&mut rng, height, width),
            SceneKind::Ramp => ramp(&mut rng, height, width),
            SceneKind::Checker => checker(&mut rng, height, width),
            SceneKind::ValueNoise => value_noise(&mut rng, height, width),
            SceneKind::Shapes => shapes(&mut rng, height, width),
        }?;
        Ok(Self { reflectance, recipe: Some((kind, seed)) })
    }

    /// Wraps an existing raster as a scene.
    pub fn from_reflectance(reflectance: Image) -> Self {
        Self { reflectance, recipe: None }
    }
}

fn uniform(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Result<Image> {
    let albedo = rng.gen_range(0.1..0.9);
    Image::constant(h, w, albedo)
}

fn ramp(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Result<Image> {
    let lo = rng.gen_range(0.0..0.3);
    let hi = rng.gen_range(0.6..1.0);
    let orientation = rng.gen_range(0..4u8);
    Image::from_fn(h, w, |r, c| {
        let t = match orientation {
            0 => c as f64 / (w - 1).max(1) as f64,
            1 => r as f64 / (h - 1).max(1) as f64,
            2 => (r + c) as f64 / (h + w - 2).max(1) as f64,
            _ => (r + (w - 1 - c)) as f64 / (h + w - 2).max(1) as f64,
        };
        lo + (hi - lo) * t
    })
}

fn checker(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Result<Image> {
    let cell = rng.gen_range(4..=24usize);
    let dark = rng.gen_range(0.05..0.45);
    let bright = rng.gen_range(0.55..0.95);
    let (dr, dc) = (rng.gen_range(0..cell), rng.gen_range(0..cell));
    Image::from_fn(h, w, |r, c| {
        if ((r + dr) / cell + (c + dc) / cell) % 2 == 0 {
            dark
        } else {
            bright
        }
    })
}

fn value_noise(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Result<Image> {
    let coarse_cell = rng.gen_range(16..=32);
    let fine_cell = rng.gen_range(4..=8);
    let coarse = lattice_noise(rng, h, w, coarse_cell);
    let fine = lattice_noise(rng, h, w, fine_cell);
    let mut vals: Vec<f64> =
        coarse.iter().zip(&fine).map(|(a, b)| a + 0.35 * b).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    for v in &mut vals {
        *v = 0.05 + 0.9 * (*v - lo) / span;
    }
    Image::new(h, w, vals)
}

/// Random values on a coarse lattice, bilinearly interpolated to `h` x `w`.
fn lattice_noise(rng: &mut ChaCha8Rng, h: usize, w: usize, cell: usize) -> Vec<f64> {
    let gh = h / cell + 2;
    let gw = w / cell + 2;
    let grid: Vec<f64> = (0..gh * gw).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let y = r as f64 / cell as f64;
        let (y0, fy) = (y.floor() as usize, y.fract());
        for c in 0..w {
            let x = c as f64 / cell as f64;
            let (x0, fx) = (x.floor() as usize, x.fract());
            let at = |gy: usize, gx: usize| grid[gy.min(gh - 1) * gw + gx.min(gw - 1)];
            let top = at(y0, x0) * (1.0 - fx) + at(y0, x0 + 1) * fx;
            let bot = at(y0 + 1, x0) * (1.0 - fx) + at(y0 + 1, x0 + 1) * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

fn shapes(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Result<Image> {
    let mut vals = vec![rng.gen_range(0.1..0.9); h * w];
    let count = rng.gen_range(5..=15);
    for _ in 0..count {
        let albedo = rng.gen_range(0.05..0.95);
        let cy = rng.gen_range(0..h) as isize;
        let cx = rng.gen_range(0..w) as isize;
        let half = rng.gen_range(h.min(w) / 16..=h.min(w) / 3).max(1) as isize;
        let disc = rng.gen_bool(0.5);
        let r0 = (cy - half).max(0) as usize;
        let r1 = ((cy + half) as usize).min(h - 1);
        let c0 = (cx - half).max(0) as usize;
        let c1 = ((cx + half) as usize).min(w - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                let dy = r as isize - cy;
                let dx = c as isize - cx;
                if !disc || dy * dy + dx * dx <= half * half {
                    vals[r * w + c] = albedo;
                }
            }
        }
    }
    Image::new(h, w, vals)
}
