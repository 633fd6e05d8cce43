//! Pixel-level primitives: grayscale rasters, Sobel gradients, bilinear
//! resampling, spatial augmentation, and bit-exact PGM file I/O.

mod pgm;
mod resize;
mod sobel;

pub use pgm::{read_pgm, write_pgm};
pub(crate) use resize::resize_linear_1d;
pub use resize::resize_bilinear;
pub use sobel::sobel_mean;

use crate::error::{LabError, Result};

/// Row-major grayscale raster with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl Image {
    /// Builds an image, validating dimensions and the `[0, 1]` pixel range.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(LabError::Dimension(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(LabError::Dimension(format!(
                "pixel buffer holds {} values, expected {}",
                pixels.len(),
                height * width
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(LabError::Domain(format!(
                "pixel value {p} outside [0, 1]"
            )));
        }
        Ok(Self { height, width, pixels })
    }

    /// Constant-intensity image.
    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        height: usize,
        width: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pixel at `(row, col)`; panics on out-of-bounds access.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.height && col < self.width, "pixel index out of bounds");
        self.pixels[row * self.width + col]
    }

    /// Row-major pixel buffer.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// One image row as a slice.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Mean intensity over all pixels.
    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Extracts the sub-rectangle described by `roi`.
    pub fn crop(&self, roi: &RoiSpec) -> Result<Self> {
        roi.validate_for(self.height, self.width)?;
        let mut pixels = Vec::with_capacity(roi.w * roi.h);
        for r in roi.y0..roi.y0 + roi.h {
            pixels.extend_from_slice(&self.row(r)[roi.x0..roi.x0 + roi.w]);
        }
        Self::new(roi.h, roi.w, pixels)
    }

    /// Mirrors columns (left-right flip).
    pub fn flip_h(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for r in 0..self.height {
            pixels.extend(self.row(r).iter().rev());
        }
        Self { height: self.height, width: self.width, pixels }
    }

    /// Mirrors rows (top-bottom flip).
    pub fn flip_v(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for r in (0..self.height).rev() {
            pixels.extend_from_slice(self.row(r));
        }
        Self { height: self.height, width: self.width, pixels }
    }

    /// Rotates by `turns` quarter turns counter-clockwise. Each turn maps the
    /// source pixel `(H-1-c, r)` to output `(r, c)`.
    pub fn rotate_quarter(&self, turns: u8) -> Self {
        let mut out = self.clone();
        for _ in 0..turns % 4 {
            let (h, w) = (out.height, out.width);
            let mut pixels = Vec::with_capacity(h * w);
            for r in 0..w {
                for c in 0..h {
                    pixels.push(out.get(h - 1 - c, r));
                }
            }
            out = Self { height: w, width: h, pixels };
        }
        out
    }
}

/// Region of interest: a sub-rectangle over which state and reward are
/// computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoiSpec {
    /// Left pixel offset.
    pub x0: usize,
    /// Top pixel offset.
    pub y0: usize,
    /// Width in pixels, at least 8.
    pub w: usize,
    /// Height in pixels, at least 8.
    pub h: usize,
}

impl RoiSpec {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if w < 8 || h < 8 {
            return Err(LabError::Dimension(format!(
                "RoI extent {w}x{h} below the 8x8 minimum"
            )));
        }
        Ok(Self { x0, y0, w, h })
    }

    /// Covers an entire `height` x `width` frame.
    pub fn full_frame(height: usize, width: usize) -> Result<Self> {
        Self::new(0, 0, width, height)
    }

    /// Checks that the region lies inside an image of the given size.
    pub fn validate_for(&self, height: usize, width: usize) -> Result<()> {
        if self.w < 8 || self.h < 8 {
            return Err(LabError::Dimension(format!(
                "RoI extent {}x{} below the 8x8 minimum",
                self.w, self.h
            )));
        }
        if self.x0 + self.w > width || self.y0 + self.h > height {
            return Err(LabError::Dimension(format!(
                "RoI ({},{})+{}x{} exceeds {}x{} image",
                self.x0, self.y0, self.w, self.h, height, width
            )));
        }
        Ok(())
    }
}

/// Spatial augmentation applied to a rendered frame; fixed for the whole
/// episode so brightness dynamics stay comparable across frames.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentationSpec {
    pub flip_h: bool,
    pub flip_v: bool,
    /// Quarter turns counter-clockwise, in `{0, 1, 2, 3}`.
    pub quarter_turns: u8,
    pub crop: Option<RoiSpec>,
    pub resize_to: Option<(usize, usize)>,
}

impl AugmentationSpec {
    /// The do-nothing augmentation.
    pub fn identity() -> Self {
        Self::default()
    }

    fn validate(&self) -> Result<()> {
        if self.quarter_turns > 3 {
            return Err(LabError::Domain(format!(
                "quarter_turns {} outside {{0,1,2,3}}",
                self.quarter_turns
            )));
        }
        if let Some((h, w)) = self.resize_to {
            if h < 8 || w < 8 {
                return Err(LabError::Dimension(format!(
                    "resize target {h}x{w} below the 8x8 minimum"
                )));
            }
        }
        Ok(())
    }
}

/// Applies `spec` in the fixed order crop, horizontal flip, vertical flip,
/// quarter turns, resize. Brightness is never altered.
pub fn apply_augmentation(img: &Image, spec: &AugmentationSpec) -> Result<Image> {
    spec.validate()?;
    let mut out = match &spec.crop {
        Some(roi) => img.crop(roi)?,
        None => img.clone(),
    };
    if spec.flip_h {
        out = out.flip_h();
    }
    if spec.flip_v {
        out = out.flip_v();
    }
    if spec.quarter_turns % 4 != 0 {
        out = out.rotate_quarter(spec.quarter_turns);
    }
    if let Some((h, w)) = spec.resize_to {
        out = resize_bilinear(&out, h, w)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_image(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| (r * w + c) as f64 / (h * w) as f64).unwrap()
    }

    #[test]
    fn new_rejects_bad_shapes_and_values() {
        assert!(Image::new(0, 4, vec![]).is_err());
        assert!(Image::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::new(1, 2, vec![0.5, 1.2]).is_err());
        assert!(Image::new(1, 2, vec![0.5, -0.1]).is_err());
        assert!(Image::new(1, 2, vec![0.5, f64::NAN]).is_err());
    }

    #[test]
    fn crop_extracts_expected_window() {
        let img = ramp_image(16, 16);
        let roi = RoiSpec::new(2, 4, 8, 8).unwrap();
        let out = img.crop(&roi).unwrap();
        assert_eq!((out.height(), out.width()), (8, 8));
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(out.get(r, c), img.get(r + 4, c + 2));
            }
        }
    }

    #[test]
    fn crop_outside_image_is_dimension_error() {
        let img = ramp_image(16, 16);
        let roi = RoiSpec { x0: 10, y0: 0, w: 8, h: 8 };
        assert!(matches!(img.crop(&roi), Err(LabError::Dimension(_))));
    }

    #[test]
    fn roi_minimum_extent_enforced() {
        assert!(RoiSpec::new(0, 0, 7, 8).is_err());
        assert!(RoiSpec::new(0, 0, 8, 4).is_err());
        assert!(RoiSpec::new(0, 0, 8, 8).is_ok());
    }

    #[test]
    fn quarter_turn_matches_index_permutation() {
        let img = ramp_image(4, 8);
        let out = img.rotate_quarter(1);
        assert_eq!((out.height(), out.width()), (8, 4));
        for r in 0..8 {
            for c in 0..4 {
                assert_eq!(out.get(r, c), img.get(4 - 1 - c, r));
            }
        }
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let img = ramp_image(5, 9);
        assert_eq!(img.rotate_quarter(4), img);
    }

    #[test]
    fn identity_augmentation_is_bit_exact() {
        let img = ramp_image(12, 10);
        let out = apply_augmentation(&img, &AugmentationSpec::identity()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn double_horizontal_flip_is_identity() {
        let img = ramp_image(9, 13);
        let spec = AugmentationSpec { flip_h: true, ..Default::default() };
        let once = apply_augmentation(&img, &spec).unwrap();
        let twice = apply_augmentation(&once, &spec).unwrap();
        assert_ne!(once, img);
        assert_eq!(twice, img);
    }

    #[test]
    fn augmentation_preserves_pixel_multiset_without_resample() {
        let img = ramp_image(8, 8);
        let spec = AugmentationSpec {
            flip_h: true,
            flip_v: true,
            quarter_turns: 3,
            crop: None,
            resize_to: None,
        };
        let out = apply_augmentation(&img, &spec).unwrap();
        let mut a: Vec<f64> = img.pixels().to_vec();
        let mut b: Vec<f64> = out.pixels().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn augmentation_pipeline_order_is_crop_first() {
        let img = ramp_image(16, 16);
        let spec = AugmentationSpec {
            flip_h: true,
            crop: Some(RoiSpec::new(0, 0, 8, 8).unwrap()),
            ..Default::default()
        };
        let out = apply_augmentation(&img, &spec).unwrap();
        let expected = img.crop(&RoiSpec::new(0, 0, 8, 8).unwrap()).unwrap().flip_h();
        assert_eq!(out, expected);
    }
}
