//! Patch extraction and overlap-averaging reconstruction.
//!
//! A `p × p` patch is vectorized column-major: entry `(i, j)` of the patch
//! (row `i`, column `j`) lands at index `i + p·j`. Patches are ordered by
//! row offset first, then column offset.

use nalgebra::DMatrix;

use crate::dictionary::TrainingSet;
use crate::error::{Error, Result};

use super::GrayImage;

/// Top-left offsets along one axis: `0, stride, 2·stride, …`, plus the last
/// valid offset when the stride does not land on it, so every pixel is covered.
pub fn grid_offsets(extent: usize, p: usize, stride: usize) -> Vec<usize> {
    let last = extent - p;
    let mut offsets: Vec<usize> = (0..=last).step_by(stride).collect();
    if offsets.last() != Some(&last) {
        offsets.push(last);
    }
    offsets
}

fn check_geometry(width: usize, height: usize, p: usize, stride: usize) -> Result<()> {
    if p == 0 || p > width.min(height) {
        return Err(Error::InvalidInput(format!(
            "patch size {p} does not fit a {width}x{height} image"
        )));
    }
    if stride == 0 || stride > p {
        return Err(Error::InvalidInput(format!(
            "stride {stride} must lie in 1..={p}"
        )));
    }
    Ok(())
}

/// Copies the patch at `(row, col)` into `out` (length `p²`).
pub fn read_patch(img: &GrayImage, row: usize, col: usize, p: usize, out: &mut [f64]) {
    for j in 0..p {
        for i in 0..p {
            out[i + p * j] = img.get(row + i, col + j);
        }
    }
}

pub fn extract_patches(img: &GrayImage, p: usize, stride: usize) -> Result<TrainingSet> {
    check_geometry(img.width(), img.height(), p, stride)?;
    let rows = grid_offsets(img.height(), p, stride);
    let cols = grid_offsets(img.width(), p, stride);
    let m = p * p;
    let mut data = DMatrix::zeros(m, rows.len() * cols.len());
    let buf = data.as_mut_slice();
    let mut n = 0;
    for &r in &rows {
        for &c in &cols {
            read_patch(img, r, c, p, &mut buf[n * m..(n + 1) * m]);
            n += 1;
        }
    }
    Ok(TrainingSet::new(data))
}

/// Sums patches into pixel accumulators; `sums` and `counts` are row-major.
pub(crate) fn accumulate_patch(
    sums: &mut [f64],
    counts: &mut [u32],
    width: usize,
    row: usize,
    col: usize,
    p: usize,
    patch: &[f64],
) {
    for j in 0..p {
        for i in 0..p {
            let idx = (row + i) * width + col + j;
            sums[idx] += patch[i + p * j];
            counts[idx] += 1;
        }
    }
}

/// How many grid patches cover each pixel (row-major).
pub fn cover_counts(width: usize, height: usize, p: usize, stride: usize) -> Result<Vec<u32>> {
    check_geometry(width, height, p, stride)?;
    let mut counts = vec![0u32; width * height];
    for &r in &grid_offsets(height, p, stride) {
        for &c in &grid_offsets(width, p, stride) {
            for j in 0..p {
                for i in 0..p {
                    counts[(r + i) * width + c + j] += 1;
                }
            }
        }
    }
    Ok(counts)
}

/// Averages overlapping patch estimates back into an image, uniform weights.
pub fn reconstruct_from_patches(
    patches: &TrainingSet,
    width: usize,
    height: usize,
    p: usize,
    stride: usize,
) -> Result<GrayImage> {
    check_geometry(width, height, p, stride)?;
    let rows = grid_offsets(height, p, stride);
    let cols = grid_offsets(width, p, stride);
    if patches.dim() != p * p || patches.len() != rows.len() * cols.len() {
        return Err(Error::InvalidInput(format!(
            "{} patches of dimension {} do not match a {}x{} grid of {p}x{p} patches",
            patches.len(),
            patches.dim(),
            rows.len(),
            cols.len()
        )));
    }
    let mut sums = vec![0.0; width * height];
    let mut counts = vec![0u32; width * height];
    let raw = patches.matrix().as_slice();
    let m = p * p;
    let mut n = 0;
    for &r in &rows {
        for &c in &cols {
            accumulate_patch(&mut sums, &mut counts, width, r, c, p, &raw[n * m..(n + 1) * m]);
            n += 1;
        }
    }
    average(sums, &counts, width, height)
}

pub(crate) fn average(mut sums: Vec<f64>, counts: &[u32], width: usize, height: usize) -> Result<GrayImage> {
    for (s, &c) in sums.iter_mut().zip(counts) {
        debug_assert!(c > 0);
        *s /= f64::from(c);
    }
    GrayImage::new(width, height, sums)
}
