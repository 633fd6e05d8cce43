//! Binary PGM (P5) encoding at 8 or 16 bits per pixel.
//!
//! Header: `P5`, optional `#` comment line, width, height, maxval (255 or
//! 65535), one whitespace byte, then the payload. 16-bit samples are
//! big-endian. Quantization is `q = round(p * maxval)`.

use super::Image;
use crate::error::{LabError, Result};

/// Serializes `img` as binary PGM at the given bit depth (8 or 16).
pub fn write_pgm(img: &Image, depth: u8) -> Result<Vec<u8>> {
    let maxval: u32 = match depth {
        8 => 255,
        16 => 65535,
        other => {
            return Err(LabError::Domain(format!(
                "PGM depth must be 8 or 16, got {other}"
            )))
        }
    };
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    out.reserve(img.pixels().len() * if depth == 8 { 1 } else { 2 });
    for &p in img.pixels() {
        let q = (p * maxval as f64).round() as u32;
        if depth == 8 {
            out.push(q as u8);
        } else {
            out.push((q >> 8) as u8);
            out.push((q & 0xff) as u8);
        }
    }
    Ok(out)
}

/// Parses a binary PGM produced by [`write_pgm`] or any conforming encoder.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    if magic != b"P5" {
        return Err(LabError::Format(format!(
            "bad PGM magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = cursor.number()? as usize;
    let height = cursor.number()? as usize;
    let maxval = cursor.number()?;
    if maxval != 255 && maxval != 65535 {
        return Err(LabError::Format(format!(
            "unsupported PGM maxval {maxval}, expected 255 or 65535"
        )));
    }
    cursor.payload_separator()?;
    let bytes_per = if maxval == 255 { 1 } else { 2 };
    let payload = cursor.rest();
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per))
        .ok_or_else(|| LabError::Format("PGM dimensions overflow".into()))?;
    if payload.len() < expected {
        return Err(LabError::Format(format!(
            "PGM payload truncated: {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let q = if bytes_per == 1 {
            payload[i] as u32
        } else {
            ((payload[2 * i] as u32) << 8) | payload[2 * i + 1] as u32
        };
        pixels.push(q as f64 / maxval as f64);
    }
    Image::new(height, width, pixels)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comment lines.
    fn token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.bytes.len() {
                return Err(LabError::Format("PGM header ended early".into()));
            }
            if self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            let start = self.pos;
            while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            return Ok(&self.bytes[start..self.pos]);
        }
    }

    fn number(&mut self) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                LabError::Format(format!(
                    "bad number {:?} in PGM header",
                    String::from_utf8_lossy(tok)
                ))
            })
    }

    /// Consumes the single whitespace byte separating header and payload.
    fn payload_separator(&mut self) -> Result<()> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(LabError::Format(
                "missing whitespace between PGM header and payload".into(),
            ));
        }
        self.pos += 1;
        Ok(())
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_pixel_encodes_to_255() {
        let img = Image::constant(1, 1, 1.0).unwrap();
        let bytes = write_pgm(&img, 8).unwrap();
        assert_eq!(bytes, b"P5\n1 1\n255\n\xff");
    }

    #[test]
    fn hand_checked_quantization_bytes() {
        let img = Image::new(2, 2, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        let bytes = write_pgm(&img, 8).unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 85, 170, 255]);
    }

    #[test]
    fn sixteen_bit_round_trip_within_half_step() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let img = Image::from_fn(9, 14, |_, _| rng.gen::<f64>()).unwrap();
        let back = read_pgm(&write_pgm(&img, 16).unwrap()).unwrap();
        assert_eq!((back.height(), back.width()), (9, 14));
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 65535.0);
        }
    }

    #[test]
    fn eight_bit_round_trip_within_half_step() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let img = Image::from_fn(6, 6, |_, _| rng.gen::<f64>()).unwrap();
        let back = read_pgm(&write_pgm(&img, 8).unwrap()).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 255.0);
        }
    }

    #[test]
    fn comment_line_after_magic_is_accepted() {
        let bytes = b"P5\n# produced by a conforming encoder\n2 1\n255\n\x00\xff";
        let img = read_pgm(bytes).unwrap();
        assert_eq!((img.height(), img.width()), (1, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn malformed_inputs_are_format_errors() {
        assert!(matches!(read_pgm(b"P6\n1 1\n255\n\x00"), Err(LabError::Format(_))));
        assert!(matches!(read_pgm(b"P5\n1 1\n100\n\x00"), Err(LabError::Format(_))));
        assert!(matches!(read_pgm(b"P5\n2 2\n255\n\x00\x00"), Err(LabError::Format(_))));
        assert!(matches!(read_pgm(b"P5\n1"), Err(LabError::Format(_))));
    }

    #[test]
    fn depth_other_than_8_or_16_rejected() {
        let img = Image::constant(1, 1, 0.5).unwrap();
        assert!(matches!(write_pgm(&img, 12), Err(LabError::Domain(_))));
    }
}
