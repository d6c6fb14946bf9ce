//! Ground-truth generators for the synthetic recovery experiment, and the
//! sparse-model predicates behind split-and-merge.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::sparse::{SparseCodeMatrix, SparseVector};

/// Shape of a synthetic problem: `N` signals of dimension `m`, each an
/// `s`-sparse combination of `K` Gaussian atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub atoms: usize,
    pub signals: usize,
    pub sparsity: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    /// 30×60 dictionary, 4·10⁴ signals, 6 atoms each.
    pub fn reference(seed: u64) -> Self {
        Self {
            dim: 30,
            atoms: 60,
            signals: 40_000,
            sparsity: 6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.sparsity >= 1
            && self.sparsity <= self.dim
            && self.dim < self.atoms
            && self.atoms <= self.signals;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "synthetic spec needs 1 <= s <= m < K <= N, got s={}, m={}, K={}, N={}",
                self.sparsity, self.dim, self.atoms, self.signals
            )))
        }
    }

    /// Ground-truth dictionary, signals and codes for this spec.
    pub fn generate(&self) -> Result<(Dictionary, TrainingSet, SparseCodeMatrix)> {
        self.validate()?;
        let dict = gen_dictionary(self.dim, self.atoms, self.seed)?;
        let (data, codes) = gen_signals(&dict, self.signals, self.sparsity, self.seed)?;
        Ok((dict, data, codes))
    }
}

/// `m x K` matrix of i.i.d. standard normal entries, columns normalized.
pub fn gen_dictionary(m: usize, k: usize, seed: u64) -> Result<Dictionary> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidInput("dictionary dimensions must be positive".into()));
    }
    let mut rng = rng::stream(seed, Purpose::Dictionary, 0);
    let atoms = DMatrix::from_fn(m, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    Dictionary::from_columns(atoms)
}

/// `N` noiseless signals `Y = DX`, each on `s` distinct uniformly drawn atoms
/// with standard normal coefficients.
pub fn gen_signals(
    dict: &Dictionary,
    n: usize,
    s: usize,
    seed: u64,
) -> Result<(TrainingSet, SparseCodeMatrix)> {
    if s > dict.len() {
        return Err(Error::InvalidInput(format!(
            "cannot draw {s} distinct atoms from {}",
            dict.len()
        )));
    }
    let mut rng = rng::stream(seed, Purpose::Signals, 0);
    let mut columns = Vec::with_capacity(n);
    for _ in 0..n {
        let support = index::sample(&mut rng, dict.len(), s);
        let pairs = support
            .into_iter()
            .map(|j| (j, rng.sample::<f64, _>(StandardNormal)))
            .collect();
        columns.push(SparseVector::from_pairs(dict.len(), pairs)?);
    }
    let codes = SparseCodeMatrix::new(dict.len(), columns)?;
    let data = TrainingSet::new(codes.synthesize_with(dict.matrix()));
    Ok((data, codes))
}

/// Whether `y` follows the sparse model: `‖x‖₀ ≤ s` and `‖y − Dx‖₂ ≤ eps`.
pub fn sparse_model_check(
    y: &DVector<f64>,
    dict: &Dictionary,
    x: &SparseVector,
    eps: f64,
    s: usize,
) -> Result<bool> {
    if y.len() != dict.dim() || x.len() != dict.len() {
        return Err(Error::Dimension(format!(
            "y has length {}, x length {}, dictionary is {}x{}",
            y.len(),
            x.len(),
            dict.dim(),
            dict.len()
        )));
    }
    if x.nnz() > s {
        return Ok(false);
    }
    Ok((y - x.synthesize(dict)).norm() <= eps)
}

/// Floating-point allowance for `lhs ≤ rhs`, relative to `‖y‖₂`. When `E` and
/// `e₁` vanish the bound is tight and both sides differ only by rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Outcome of [`composition_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionCheck {
    /// `lhs ≤ rhs` up to [`ROUNDING_SLACK`].
    pub holds: bool,
    /// `‖y − D(Z x₁)‖₂`.
    pub lhs: f64,
    /// `K ε₂ + ε₁`, with `K` the number of composed atoms (columns of `Z`).
    pub rhs: f64,
    /// `‖Z x₁‖₀ ≤ ‖x₁‖₀ · max_j ‖z_j‖₀`.
    pub support_bound_holds: bool,
    pub composed_nnz: usize,
    pub support_bound: usize,
}

/// Checks the two-stage composition bound on a concrete instance.
///
/// The intermediate atoms are `D̃ = DZ + E` and the signal is
/// `y = D̃ x₁ + e₁`. With `ε₁ = ‖e₁‖₂` and `ε₂ = ‖x₁‖₂ · max_j ‖E_j‖₂` (so every
/// column of `D̃` is within `ε₂ / ‖x₁‖₂` of its sparse model `D z_j`), the
/// composed code `Z x₁` must satisfy `‖y − D Z x₁‖₂ ≤ K ε₂ + ε₁`.
pub fn composition_bound_check(
    dict: &DMatrix<f64>,
    z: &SparseCodeMatrix,
    e: &DMatrix<f64>,
    x1: &SparseVector,
    e1: &DVector<f64>,
) -> Result<CompositionCheck> {
    let (m, k) = (dict.nrows(), z.ncols());
    if z.rows() != dict.ncols() || e.nrows() != m || e.ncols() != k || x1.len() != k || e1.len() != m
    {
        return Err(Error::Dimension(format!(
            "D is {m}x{}, Z is {}x{k}, E is {}x{}, x1 has {}, e1 has {}",
            dict.ncols(),
            z.rows(),
            e.nrows(),
            e.ncols(),
            x1.len(),
            e1.len()
        )));
    }
    let x1_norm = x1.norm();
    if x1_norm == 0.0 {
        return Err(Error::InvalidInput(
            "x1 must be nonzero: the column bound is eps2 / ‖x1‖".into(),
        ));
    }

    let d_tilde = z.synthesize_with(dict) + e;
    let y = &d_tilde * x1.to_dense() + e1;
    let y_norm = y.norm();

    // r = Z x₁ accumulated sparsely.
    let mut composed = vec![0.0; dict.ncols()];
    for &(j, a) in x1.entries() {
        for &(i, v) in z.column(j).entries() {
            composed[i] += a * v;
        }
    }
    let composed = SparseVector::from_dense(&composed);
    let lhs = (y - composed.synthesize_with(dict)).norm();

    let max_e = e.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let eps2 = x1_norm * max_e;
    let eps1 = e1.norm();
    let rhs = k as f64 * eps2 + eps1;

    let support_bound = x1.nnz() * z.max_nnz();
    let slack = ROUNDING_SLACK * y_norm;
    Ok(CompositionCheck {
        holds: lhs <= rhs + slack,
        lhs,
        rhs,
        support_bound_holds: composed.nnz() <= support_bound,
        composed_nnz: composed.nnz(),
        support_bound,
    })
}
