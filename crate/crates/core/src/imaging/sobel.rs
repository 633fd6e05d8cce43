//! Mean Sobel gradient magnitude, the image-noise measure.

use super::Image;
use crate::error::{LabError, Result};
use crate::par;

/// Mean over all pixels of `sqrt(Gx^2 + Gy^2)` under the standard 3x3 Sobel
/// kernels with edge replication at the borders.
pub fn sobel_mean(img: &Image) -> Result<f64> {
    let (h, w) = (img.height(), img.width());
    if h < 3 || w < 3 {
        return Err(LabError::Dimension(format!(
            "Sobel needs at least 3x3 pixels, got {h}x{w}"
        )));
    }
    let row_sums = par::map_indexed(h, |r| {
        let rm = r.saturating_sub(1);
        let rp = (r + 1).min(h - 1);
        let mut sum = 0.0;
        for c in 0..w {
            let cm = c.saturating_sub(1);
            let cp = (c + 1).min(w - 1);
            let (p00, p01, p02) = (img.get(rm, cm), img.get(rm, c), img.get(rm, cp));
            let (p10, p12) = (img.get(r, cm), img.get(r, cp));
            let (p20, p21, p22) = (img.get(rp, cm), img.get(rp, c), img.get(rp, cp));
            let gx = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
            let gy = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
            sum += (gx * gx + gy * gy).sqrt();
        }
        sum
    });
    Ok(row_sums.iter().sum::<f64>() / (h * w) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference convolution written directly from the kernel matrices.
    fn naive_sobel_mean(img: &Image) -> f64 {
        const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
        const KY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
        let (h, w) = (img.height() as isize, img.width() as isize);
        let sample = |r: isize, c: isize| {
            img.get(r.clamp(0, h - 1) as usize, c.clamp(0, w - 1) as usize)
        };
        let mut total = 0.0;
        for r in 0..h {
            for c in 0..w {
                let mut gx = 0.0;
                let mut gy = 0.0;
                for (i, row) in KX.iter().enumerate() {
                    for (j, kx) in row.iter().enumerate() {
                        let p = sample(r + i as isize - 1, c + j as isize - 1);
                        gx += kx * p;
                        gy += KY[i][j] * p;
                    }
                }
                total += gx.hypot(gy);
            }
        }
        total / (h * w) as f64
    }

    #[test]
    fn constant_image_has_zero_gradient() {
        let img = Image::constant(8, 8, 0.5).unwrap();
        assert_eq!(sobel_mean(&img).unwrap(), 0.0);
    }

    #[test]
    fn half_split_matches_naive_oracle() {
        let img = Image::from_fn(8, 8, |_, c| if c < 4 { 0.0 } else { 1.0 }).unwrap();
        let got = sobel_mean(&img).unwrap();
        let want = naive_sobel_mean(&img);
        assert!((got - want).abs() < 1e-12, "got {got}, oracle {want}");
        assert!(got > 0.0);
    }

    #[test]
    fn checkerboard_matches_naive_oracle() {
        let img = Image::from_fn(8, 8, |r, c| ((r + c) % 2) as f64).unwrap();
        let got = sobel_mean(&img).unwrap();
        let want = naive_sobel_mean(&img);
        assert!((got - want).abs() < 1e-12, "got {got}, oracle {want}");
    }

    #[test]
    fn random_images_match_naive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let img = Image::from_fn(17, 23, |_, _| rng.gen::<f64>()).unwrap();
            let got = sobel_mean(&img).unwrap();
            let want = naive_sobel_mean(&img);
            assert!((got - want).abs() < 1e-12, "got {got}, oracle {want}");
        }
    }

    #[test]
    fn flip_invariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let img = Image::from_fn(16, 16, |_, _| rng.gen::<f64>()).unwrap();
        let base = sobel_mean(&img).unwrap();
        assert!((sobel_mean(&img.flip_h()).unwrap() - base).abs() < 1e-9);
        assert!((sobel_mean(&img.flip_v()).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn too_small_image_is_dimension_error() {
        let img = Image::constant(2, 8, 0.5).unwrap();
        assert!(matches!(sobel_mean(&img), Err(LabError::Dimension(_))));
    }
}
