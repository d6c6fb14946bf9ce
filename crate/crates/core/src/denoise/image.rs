//! Grayscale images and binary PGM (P5) I/O.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Row-major grayscale image with real-valued pixels.
///
/// Pixels are nominally in `[0, 255]` but are not clamped while processing;
/// clamping happens on save.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!("image size {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// `f(row, col)`, called in row-major order.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Copy with every pixel clamped to `[0, 255]`.
    pub fn clamped(&self) -> Self {
        Self {
            pixels: self.pixels.iter().map(|v| v.clamp(0.0, 255.0)).collect(),
            ..self.clone()
        }
    }

    /// 8-bit pixels: clamp to `[0, 255]`, round half away from zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|v| v.clamp(0.0, 255.0).round() as u8)
            .collect()
    }
}

/// Adds i.i.d. `N(0, σ²)` noise to every pixel without clamping.
pub fn add_gaussian_noise(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("noise level {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = rng::stream(seed, Purpose::Noise, 0);
    let pixels = img
        .pixels
        .iter()
        .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    GrayImage::new(img.width, img.height, pixels)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_bytes());
    out
}

/// Parses a binary PGM with maxval 255. Header comments are allowed.
pub fn decode_pgm(bytes: &[u8], origin: &Path) -> Result<GrayImage> {
    let bad = |reason: &str| Error::format(origin, reason);
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // Skip whitespace and comments.
        while pos < bytes.len() {
            match bytes[pos] {
                b' ' | b'\t' | b'\n' | b'\r' => pos += 1,
                b'#' => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM (expected magic P5)"));
    }
    let parse = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(&format!("invalid {what} {s:?}")))
    };
    let width = parse(fields[1], "width")?;
    let height = parse(fields[2], "height")?;
    let maxval = parse(fields[3], "maxval")?;
    if maxval != 255 {
        return Err(bad(&format!("maxval {maxval} is not supported, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(bad("zero image dimension"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("missing raster"));
    }
    pos += 1;
    let raster = &bytes[pos..];
    if raster.len() != width * height {
        return Err(bad(&format!(
            "raster has {} bytes, expected {}",
            raster.len(),
            width * height
        )));
    }
    GrayImage::new(width, height, raster.iter().map(|&b| f64::from(b)).collect())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_payload() {
        let img = GrayImage::new(1, 1, vec![128.0]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(bytes, b"P5\n1 1\n255\n\x80");
    }

    #[test]
    fn save_clamps_and_rounds() {
        let img = GrayImage::new(4, 1, vec![255.7, -3.0, 10.5, 11.49]).unwrap();
        assert_eq!(img.to_bytes(), vec![255, 0, 11, 11]);
    }

    #[test]
    fn header_with_comment_parses() {
        let bytes = b"P5\n# made by hand\n2 1\n255\n\x01\x02";
        let img = decode_pgm(bytes, Path::new("mem")).unwrap();
        assert_eq!(img.pixels(), &[1.0, 2.0]);
    }

    #[test]
    fn malformed_headers_fail() {
        let p = Path::new("mem");
        assert!(decode_pgm(b"P2\n1 1\n255\n\x00", p).is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00", p).is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00", p).is_err());
        assert!(decode_pgm(b"P5\n2", p).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = GrayImage::filled(3, 3, 7.0).unwrap();
        assert_eq!(add_gaussian_noise(&img, 0.0, 1).unwrap(), img);
        let noisy = add_gaussian_noise(&img, 5.0, 1).unwrap();
        assert_eq!(noisy, add_gaussian_noise(&img, 5.0, 1).unwrap());
        assert_ne!(noisy, img);
    }
}
