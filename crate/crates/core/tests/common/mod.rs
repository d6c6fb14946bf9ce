//! Reference implementations and instance generators shared by the test
//! targets. Written for clarity, not speed.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparsedict::{Dictionary, SparseCodeMatrix, SparseVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7e57)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_dictionary(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Dictionary {
    Dictionary::from_columns(gaussian(rng, m, k)).unwrap()
}

/// An `m × m` orthogonal matrix from the QR factorization of a Gaussian one.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    gaussian(rng, m, m).qr().q()
}

/// One step of the greedy trace: the atom chosen and all coefficients after
/// the least-squares refit.
#[derive(Debug, Clone)]
pub struct NaiveStep {
    pub atom: usize,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
}

/// Textbook OMP: recompute `Dᵀr` from the explicit residual every step and
/// refit by SVD least squares on the selected columns.
pub fn naive_omp(y: &DVector<f64>, d: &DMatrix<f64>, s: usize) -> Vec<NaiveStep> {
    let k = d.ncols();
    let mut support: Vec<usize> = Vec::new();
    let mut r = y.clone();
    let mut steps = Vec::new();
    for _ in 0..s {
        if r.norm() <= 1e-13 * y.norm() {
            break;
        }
        let corr = d.tr_mul(&r);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..k {
            if support.contains(&j) {
                continue;
            }
            let a = corr[j].abs();
            if best.is_none_or(|(_, b)| a > b + 1e-12) {
                best = Some((j, a));
            }
        }
        let Some((j, a)) = best else { break };
        if a == 0.0 {
            break;
        }
        support.push(j);
        let sub = d.select_columns(&support);
        let x = sub.clone().svd(true, true).solve(y, 1e-14).unwrap();
        r = y - &sub * &x;
        steps.push(NaiveStep {
            atom: j,
            coefficients: x.iter().copied().collect(),
            residual_norm: r.norm(),
        });
    }
    steps
}

/// `D = Y Xᵀ (X Xᵀ)⁻¹` with a dense LU inverse.
pub fn normal_equation_mod(y: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let xxt = x * x.transpose();
    let inv = xxt.try_inverse().expect("X Xᵀ must be invertible");
    y * x.transpose() * inv
}

/// Random `k × n` codes with `s` nonzeros per column, every row used.
pub fn random_codes(rng: &mut ChaCha8Rng, k: usize, n: usize, s: usize) -> SparseCodeMatrix {
    let columns = (0..n)
        .map(|c| {
            let mut idx: Vec<usize> = vec![c % k];
            while idx.len() < s {
                let j = rng.random_range(0..k);
                if !idx.contains(&j) {
                    idx.push(j);
                }
            }
            let pairs = idx
                .into_iter()
                .map(|j| {
                    let v: f64 = rng.sample(StandardNormal);
                    (j, v + v.signum() * 0.1)
                })
                .collect();
            SparseVector::from_pairs(k, pairs).unwrap()
        })
        .collect();
    SparseCodeMatrix::new(k, columns).unwrap()
}

pub fn rel_fro(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
