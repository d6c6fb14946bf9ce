//! Evaluation metrics.

use nalgebra::DMatrix;

use crate::denoise::GrayImage;
use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::sparse::SparseCodeMatrix;

/// Reported in place of −∞ dB for an exact reconstruction.
pub const MSE_DB_FLOOR: f64 = -300.0;

/// Reported in place of +∞ dB for identical images.
pub const PSNR_CAP: f64 = 300.0;

/// Correlation an estimated atom needs to count a true atom as recovered.
pub const RECOVERY_THRESHOLD: f64 = 0.98;

/// `20·log₁₀(‖Y − DX‖_F / ‖Y‖_F)`.
pub fn mse_db(data: &TrainingSet, dict: &Dictionary, codes: &SparseCodeMatrix) -> Result<f64> {
    mse_db_dense(data.matrix(), dict.matrix(), codes)
}

pub(crate) fn mse_db_dense(data: &DMatrix<f64>, atoms: &DMatrix<f64>, codes: &SparseCodeMatrix) -> Result<f64> {
    if codes.ncols() != data.ncols() || codes.rows() != atoms.ncols() || atoms.nrows() != data.nrows() {
        return Err(Error::Dimension(format!(
            "Y is {}x{}, D is {}x{}, X is {}x{}",
            data.nrows(),
            data.ncols(),
            atoms.nrows(),
            atoms.ncols(),
            codes.rows(),
            codes.ncols()
        )));
    }
    let total = data.norm();
    if total == 0.0 {
        return Err(Error::InvalidInput("training MSE of an all-zero data matrix".into()));
    }
    let ratio = codes.residual_norm(data, atoms) / total;
    Ok(if ratio > 0.0 {
        (20.0 * ratio.log10()).max(MSE_DB_FLOOR)
    } else {
        MSE_DB_FLOOR
    })
}

/// Percentage of true atoms `d_i` with `max_j |d_iᵀ d̂_j| ≥ threshold`.
///
/// One estimated atom may account for several true atoms.
pub fn atom_recovery(truth: &Dictionary, estimate: &Dictionary, threshold: f64) -> Result<f64> {
    if truth.dim() != estimate.dim() {
        return Err(Error::Dimension(format!(
            "true atoms have dimension {}, estimated {}",
            truth.dim(),
            estimate.dim()
        )));
    }
    let corr = truth.matrix().tr_mul(estimate.matrix());
    let recovered = corr
        .row_iter()
        .filter(|row| row.iter().any(|c| c.abs() >= threshold))
        .count();
    Ok(100.0 * recovered as f64 / truth.len() as f64)
}

/// `20·log₁₀(255 / RMSE)` over all pixels.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(Error::Dimension(format!(
            "reference is {}x{}, test is {}x{}",
            reference.width(),
            reference.height(),
            test.width(),
            test.height()
        )));
    }
    let n = reference.pixels().len() as f64;
    let sse: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((20.0 * (255.0 / (sse / n).sqrt()).log10()).min(PSNR_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseVector;

    #[test]
    fn mse_closed_forms() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let y = TrainingSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
        let exact = SparseCodeMatrix::new(2, vec![SparseVector::from_dense(&[1.0, 0.0])]).unwrap();
        assert_eq!(mse_db(&y, &d, &exact).unwrap(), MSE_DB_FLOOR);
        let off = SparseCodeMatrix::new(2, vec![SparseVector::from_dense(&[0.9, 0.0])]).unwrap();
        assert!((mse_db(&y, &d, &off).unwrap() + 20.0).abs() < 1e-12);
        let zero = TrainingSet::new(DMatrix::zeros(2, 1));
        assert!(mse_db(&zero, &d, &exact).is_err());
    }

    #[test]
    fn recovery_ignores_sign_and_order() {
        let d = crate::synthesis::gen_dictionary(5, 8, 1).unwrap();
        assert_eq!(atom_recovery(&d, &d, RECOVERY_THRESHOLD).unwrap(), 100.0);
        let flipped = Dictionary::new(-d.matrix().clone()).unwrap();
        assert_eq!(atom_recovery(&d, &flipped, RECOVERY_THRESHOLD).unwrap(), 100.0);
    }

    #[test]
    fn psnr_closed_forms() {
        let a = GrayImage::new(4, 3, vec![100.0; 12]).unwrap();
        let b = GrayImage::new(4, 3, vec![105.0; 12]).unwrap();
        let expected = 20.0 * 51f64.log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 34.151).abs() < 1e-3);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP);
        let c = GrayImage::new(3, 4, vec![100.0; 12]).unwrap();
        assert!(psnr(&a, &c).is_err());
    }
}
