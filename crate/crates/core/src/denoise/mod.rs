//! Patch-based image denoising with a learned dictionary.
//!
//! Every overlapping `p × p` patch of the noisy image is coded with
//! error-bounded OMP at `ε = gain · σ`, replaced by its sparse approximation,
//! and the overlapping estimates are averaged back into an image. The result is
//! clamped to `[0, 255]` once, after averaging.

pub mod dct;
pub mod image;
pub mod patches;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::omp::{CodingMode, SparseCoder};
use crate::rng::{self, Purpose};

pub use dct::overcomplete_dct;
pub use image::{add_gaussian_noise, load_pgm, save_pgm, GrayImage};
pub use patches::{extract_patches, reconstruct_from_patches};

/// Denoising parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseConfig {
    pub patch_size: usize,
    pub stride: usize,
    /// Noise standard deviation in gray levels.
    pub sigma: f64,
    /// Error bound per patch is `eps_gain · sigma`.
    pub eps_gain: f64,
    /// Atom cap per patch; `None` means `patch_size²`.
    pub max_atoms: Option<usize>,
}

impl DenoiseConfig {
    pub fn new(sigma: f64) -> Self {
        Self {
            patch_size: 8,
            stride: 1,
            sigma,
            eps_gain: 8.5,
            max_atoms: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.stride == 0 || self.stride > self.patch_size {
            return Err(Error::Config(format!(
                "need patch size >= 1 and 1 <= stride <= patch size, got p={}, stride={}",
                self.patch_size, self.stride
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("noise level {}", self.sigma)));
        }
        if !(self.eps_gain >= 0.0 && self.eps_gain.is_finite()) {
            return Err(Error::Config(format!("error gain {}", self.eps_gain)));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.eps_gain * self.sigma
    }
}

/// Rows of patch offsets coded per parallel batch.
const ROW_BATCH: usize = 16;

pub fn denoise_image(noisy: &GrayImage, dict: &Dictionary, cfg: &DenoiseConfig) -> Result<GrayImage> {
    let p = cfg.patch_size;
    let m = p * p;
    if dict.dim() != m {
        return Err(Error::Dimension(format!(
            "dictionary atoms have dimension {}, {p}x{p} patches need {m}",
            dict.dim()
        )));
    }
    cfg.validate()?;
    let (width, height) = (noisy.width(), noisy.height());
    let counts = patches::cover_counts(width, height, p, cfg.stride)?;
    let rows = patches::grid_offsets(height, p, cfg.stride);
    let cols = patches::grid_offsets(width, p, cfg.stride);
    let mode = CodingMode::ErrorBound {
        eps: cfg.epsilon(),
        max_atoms: cfg.max_atoms.unwrap_or(m).min(dict.len()),
    };
    let coder = SparseCoder::new(dict);

    let mut sums = vec![0.0; width * height];
    let mut scratch = vec![0u32; width * height];
    for chunk in rows.chunks(ROW_BATCH) {
        let estimates: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|&r| {
                let mut out = vec![0.0; cols.len() * m];
                let mut y = vec![0.0; m];
                for (n, &c) in cols.iter().enumerate() {
                    patches::read_patch(noisy, r, c, p, &mut y);
                    let code = coder.code(&y, mode)?.code;
                    let est = &mut out[n * m..(n + 1) * m];
                    for &(j, v) in code.entries() {
                        for (e, a) in est.iter_mut().zip(dict.atom(j).iter()) {
                            *e += v * a;
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (&r, est) in chunk.iter().zip(&estimates) {
            for (n, &c) in cols.iter().enumerate() {
                patches::accumulate_patch(&mut sums, &mut scratch, width, r, c, p, &est[n * m..(n + 1) * m]);
            }
        }
    }
    debug_assert_eq!(scratch, counts);
    Ok(patches::average(sums, &counts, width, height)?.clamped())
}

/// Draws `count` training patches at uniformly random offsets across all
/// images, so each image contributes in proportion to its number of patch
/// positions.
pub fn sample_training_patches(images: &[GrayImage], p: usize, count: usize, seed: u64) -> Result<TrainingSet> {
    let positions: Vec<usize> = images
        .iter()
        .map(|img| {
            if p == 0 || p > img.width().min(img.height()) {
                Err(Error::InvalidInput(format!(
                    "patch size {p} does not fit a {}x{} image",
                    img.width(),
                    img.height()
                )))
            } else {
                Ok((img.height() - p + 1) * (img.width() - p + 1))
            }
        })
        .collect::<Result<_>>()?;
    let total: usize = positions.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("no training images".into()));
    }
    let m = p * p;
    let mut data = nalgebra::DMatrix::zeros(m, count);
    let buf = data.as_mut_slice();
    let mut rng = rng::stream(seed, Purpose::PatchSampling, 0);
    for n in 0..count {
        let mut pick = rng.random_range(0..total);
        let mut which = 0;
        while pick >= positions[which] {
            pick -= positions[which];
            which += 1;
        }
        let img = &images[which];
        let span = img.width() - p + 1;
        let (r, c) = (pick / span, pick % span);
        patches::read_patch(img, r, c, p, &mut buf[n * m..(n + 1) * m]);
    }
    Ok(TrainingSet::new(data))
}
