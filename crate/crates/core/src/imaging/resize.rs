//! Bilinear resampling with pixel-center alignment.

use super::Image;
use crate::error::{LabError, Result};
use crate::par;

/// Source coordinate of destination index `d` under pixel-center alignment,
/// clamped to the valid range.
#[inline]
fn src_coord(d: usize, in_len: usize, out_len: usize) -> f64 {
    let s = (d as f64 + 0.5) * (in_len as f64 / out_len as f64) - 0.5;
    s.clamp(0.0, (in_len - 1) as f64)
}

#[inline]
fn split(s: f64, in_len: usize) -> (usize, usize, f64) {
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(in_len - 1);
    (i0, i1, s - i0 as f64)
}

/// Resizes to `out_h` x `out_w`. Resizing to the source dimensions is a
/// bit-exact identity.
pub fn resize_bilinear(img: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    if out_h == 0 || out_w == 0 {
        return Err(LabError::Dimension(format!(
            "resize target {out_h}x{out_w} must be positive"
        )));
    }
    let (in_h, in_w) = (img.height(), img.width());
    let rows = par::map_indexed(out_h, |r| {
        let (r0, r1, ty) = split(src_coord(r, in_h, out_h), in_h);
        let mut row = Vec::with_capacity(out_w);
        for c in 0..out_w {
            let (c0, c1, tx) = split(src_coord(c, in_w, out_w), in_w);
            let top = img.get(r0, c0) * (1.0 - tx) + img.get(r0, c1) * tx;
            let bot = img.get(r1, c0) * (1.0 - tx) + img.get(r1, c1) * tx;
            row.push((top * (1.0 - ty) + bot * ty).clamp(0.0, 1.0));
        }
        row
    });
    Image::new(out_h, out_w, rows.concat())
}

/// Linearly resamples a 1-D profile to `out_len` entries using the same
/// pixel-center convention as the 2-D resize.
pub(crate) fn resize_linear_1d(values: &[f64], out_len: usize) -> Vec<f64> {
    assert!(!values.is_empty() && out_len > 0);
    (0..out_len)
        .map(|d| {
            let (i0, i1, t) = split(src_coord(d, values.len(), out_len), values.len());
            (values[i0] * (1.0 - t) + values[i1] * t).clamp(0.0, 1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct four-weight bilinear reference.
    fn naive_bilinear(img: &Image, out_h: usize, out_w: usize) -> Vec<f64> {
        let (in_h, in_w) = (img.height(), img.width());
        let mut out = Vec::with_capacity(out_h * out_w);
        for r in 0..out_h {
            for c in 0..out_w {
                let sy = ((r as f64 + 0.5) * in_h as f64 / out_h as f64 - 0.5)
                    .clamp(0.0, (in_h - 1) as f64);
                let sx = ((c as f64 + 0.5) * in_w as f64 / out_w as f64 - 0.5)
                    .clamp(0.0, (in_w - 1) as f64);
                let (y0, x0) = (sy.floor() as usize, sx.floor() as usize);
                let (y1, x1) = ((y0 + 1).min(in_h - 1), (x0 + 1).min(in_w - 1));
                let (fy, fx) = (sy - y0 as f64, sx - x0 as f64);
                out.push(
                    img.get(y0, x0) * (1.0 - fy) * (1.0 - fx)
                        + img.get(y0, x1) * (1.0 - fy) * fx
                        + img.get(y1, x0) * fy * (1.0 - fx)
                        + img.get(y1, x1) * fy * fx,
                );
            }
        }
        out
    }

    #[test]
    fn identity_resize_is_bit_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let img = Image::from_fn(13, 7, |_, _| rng.gen::<f64>()).unwrap();
        let out = resize_bilinear(&img, 13, 7).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = Image::constant(16, 16, 0.7).unwrap();
        let out = resize_bilinear(&img, 4, 4).unwrap();
        for &p in out.pixels() {
            assert!((p - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn ramp_downscale_matches_naive_oracle() {
        let img = Image::from_fn(4, 32, |_, c| c as f64 / 31.0).unwrap();
        let out = resize_bilinear(&img, 4, 8).unwrap();
        let want = naive_bilinear(&img, 4, 8);
        for (got, want) in out.pixels().iter().zip(&want) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn random_resizes_match_naive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for &(oh, ow) in &[(8, 8), (31, 9), (64, 64), (5, 40)] {
            let img = Image::from_fn(24, 18, |_, _| rng.gen::<f64>()).unwrap();
            let out = resize_bilinear(&img, oh, ow).unwrap();
            let want = naive_bilinear(&img, oh, ow);
            for (got, want) in out.pixels().iter().zip(&want) {
                assert!((got - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_target_dimension_rejected() {
        let img = Image::constant(4, 4, 0.2).unwrap();
        assert!(matches!(
            resize_bilinear(&img, 0, 4),
            Err(LabError::Dimension(_))
        ));
    }

    #[test]
    fn one_dimensional_resample_interpolates_linearly() {
        let vals = [0.0, 1.0];
        let out = resize_linear_1d(&vals, 4);
        let want = [0.0, 0.25, 0.75, 1.0];
        for (got, want) in out.iter().zip(&want) {
            assert!((got - want).abs() < 1e-12, "{out:?}");
        }
        assert_eq!(resize_linear_1d(&[0.3, 0.6, 0.9], 3), vec![0.3, 0.6, 0.9]);
    }
}
