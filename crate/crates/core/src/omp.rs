//! Orthogonal matching pursuit.
//!
//! Each step selects the unused atom with the largest absolute correlation to
//! the current residual, then refits all selected coefficients by least squares.
//! The least-squares solve keeps a Cholesky factor of the support Gram matrix
//! and extends it by one row per step; correlations are updated through the
//! precomputed Gram matrix `DᵀD` instead of recomputing `Dᵀr`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::sparse::{SparseCodeMatrix, SparseVector};

/// Correlations closer than this count as a tie; the lower atom index wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Smallest admissible pivot when extending the support Cholesky factor.
pub const GRAM_GUARD: f64 = 1e-12;

/// Residual norms at or below this fraction of `‖y‖` are an exact fit.
pub const EXACT_FIT_TOLERANCE: f64 = 1e-13;

/// Stopping rule for a pursuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodingMode {
    /// Select exactly `s` atoms (fewer only on an exact fit or a singular support).
    FixedSparsity(usize),
    /// Stop once `‖y − Dx‖₂ ≤ eps`, or when `max_atoms` atoms are selected.
    ErrorBound { eps: f64, max_atoms: usize },
}

impl CodingMode {
    fn validate(&self, dict: &Dictionary) -> Result<()> {
        let (m, k) = (dict.dim(), dict.len());
        match *self {
            CodingMode::FixedSparsity(s) => {
                if s == 0 || s > m.min(k) {
                    return Err(Error::InvalidInput(format!(
                        "sparsity {s} must lie in 1..={}",
                        m.min(k)
                    )));
                }
            }
            CodingMode::ErrorBound { eps, max_atoms } => {
                if !(eps >= 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "error bound must be finite and nonnegative, got {eps}"
                    )));
                }
                if max_atoms == 0 || max_atoms > m.min(k) {
                    return Err(Error::InvalidInput(format!(
                        "atom cap {max_atoms} must lie in 1..={}",
                        m.min(k)
                    )));
                }
            }
        }
        Ok(())
    }

    fn max_atoms(&self) -> usize {
        match *self {
            CodingMode::FixedSparsity(s) => s,
            CodingMode::ErrorBound { max_atoms, .. } => max_atoms,
        }
    }
}

/// Why a pursuit stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    SparsityReached,
    ToleranceReached,
    /// Error-bound mode ran out of atoms before reaching the tolerance.
    CapReached,
    ExactFit,
    /// The residual is orthogonal to every remaining atom.
    NoCorrelation,
    /// The next atom was numerically dependent on the current support.
    SingularGram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpOutcome {
    pub code: SparseVector,
    /// Atoms in the order they were selected.
    pub selected: Vec<usize>,
    /// `‖y‖₂` followed by the residual norm after every step.
    pub residual_trace: Vec<f64>,
    pub stop: StopReason,
}

impl OmpOutcome {
    pub fn residual_norm(&self) -> f64 {
        *self.residual_trace.last().expect("trace starts with ‖y‖")
    }
}

/// Codes for a whole batch plus how many columns stopped abnormally.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub codes: SparseCodeMatrix,
    pub singular: usize,
    pub cap_reached: usize,
}

/// A dictionary with its Gram matrix, ready to code many signals.
#[derive(Debug, Clone)]
pub struct SparseCoder<'a> {
    dict: &'a Dictionary,
    gram: DMatrix<f64>,
}

impl<'a> SparseCoder<'a> {
    pub fn new(dict: &'a Dictionary) -> Self {
        Self {
            dict,
            gram: dict.gram(),
        }
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    pub fn code(&self, y: &[f64], mode: CodingMode) -> Result<OmpOutcome> {
        mode.validate(self.dict)?;
        let mut ws = Workspace::new(self.dict.dim(), self.dict.len(), mode.max_atoms());
        self.code_with(y, mode, &mut ws)
    }

    /// Codes every column of `data`. Columns are independent and processed in
    /// parallel; the output does not depend on the schedule.
    pub fn code_batch(&self, data: &TrainingSet, mode: CodingMode) -> Result<BatchOutcome> {
        if data.dim() != self.dict.dim() {
            return Err(Error::Dimension(format!(
                "signals have dimension {}, dictionary atoms {}",
                data.dim(),
                self.dict.dim()
            )));
        }
        mode.validate(self.dict)?;
        let (m, k) = (self.dict.dim(), self.dict.len());
        let cap = mode.max_atoms();
        let raw = data.matrix().as_slice();
        let outcomes: Vec<(SparseVector, StopReason)> = (0..data.len())
            .into_par_iter()
            .map_init(
                || Workspace::new(m, k, cap),
                |ws, i| {
                    self.code_with(&raw[i * m..(i + 1) * m], mode, ws)
                        .map(|o| (o.code, o.stop))
                },
            )
            .collect::<Result<_>>()?;
        let singular = outcomes
            .iter()
            .filter(|(_, s)| *s == StopReason::SingularGram)
            .count();
        let cap_reached = outcomes
            .iter()
            .filter(|(_, s)| *s == StopReason::CapReached)
            .count();
        let codes = SparseCodeMatrix::new(k, outcomes.into_iter().map(|(c, _)| c).collect())?;
        Ok(BatchOutcome {
            codes,
            singular,
            cap_reached,
        })
    }

    fn code_with(&self, y: &[f64], mode: CodingMode, ws: &mut Workspace) -> Result<OmpOutcome> {
        let (m, k) = (self.dict.dim(), self.dict.len());
        if y.len() != m {
            return Err(Error::Dimension(format!(
                "signal has length {}, dictionary atoms {m}",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("signal has non-finite entries".into()));
        }
        let atoms = self.dict.matrix().as_slice();
        let gram = self.gram.as_slice();
        let cap = mode.max_atoms();
        ws.reset();

        for j in 0..k {
            let c = dot(&atoms[j * m..(j + 1) * m], y);
            ws.corr0[j] = c;
            ws.alpha[j] = c;
        }
        let y_norm = dot(y, y).sqrt();
        let mut r_norm = y_norm;
        let mut selected: Vec<usize> = Vec::with_capacity(cap);
        let mut trace = Vec::with_capacity(cap + 1);
        trace.push(r_norm);

        let stop = loop {
            if let CodingMode::ErrorBound { eps, .. } = mode {
                if r_norm <= eps {
                    break StopReason::ToleranceReached;
                }
            }
            if r_norm <= EXACT_FIT_TOLERANCE * y_norm {
                break StopReason::ExactFit;
            }
            if selected.len() == cap {
                break match mode {
                    CodingMode::FixedSparsity(_) => StopReason::SparsityReached,
                    CodingMode::ErrorBound { .. } => StopReason::CapReached,
                };
            }

            let mut best: Option<(usize, f64)> = None;
            for j in 0..k {
                if ws.in_support[j] {
                    continue;
                }
                let a = ws.alpha[j].abs();
                match best {
                    Some((_, b)) if a <= b + TIE_TOLERANCE => {}
                    _ => best = Some((j, a)),
                }
            }
            let Some((j, _)) = best.filter(|&(_, a)| a > 0.0) else {
                break StopReason::NoCorrelation;
            };

            // Extend the Cholesky factor of G[S, S] by the new atom.
            let n = selected.len();
            for (i, &si) in selected.iter().enumerate() {
                ws.w[i] = gram[j * k + si];
            }
            for i in 0..n {
                let row = &ws.chol[i * cap..i * cap + i];
                let acc = ws.w[i] - dot(row, &ws.w[..i]);
                ws.w[i] = acc / ws.chol[i * cap + i];
            }
            let pivot = gram[j * k + j] - dot(&ws.w[..n], &ws.w[..n]);
            if !(pivot > GRAM_GUARD) {
                break StopReason::SingularGram;
            }
            let diag = pivot.sqrt();
            ws.chol[n * cap..n * cap + n].copy_from_slice(&ws.w[..n]);
            ws.chol[n * cap + n] = diag;
            ws.z[n] = (ws.corr0[j] - dot(&ws.w[..n], &ws.z[..n])) / diag;
            selected.push(j);
            ws.in_support[j] = true;
            let n = n + 1;

            // Back substitution: Lᵀ x = z.
            for i in (0..n).rev() {
                let mut acc = ws.z[i];
                for l in i + 1..n {
                    acc -= ws.chol[l * cap + i] * ws.coef[l];
                }
                ws.coef[i] = acc / ws.chol[i * cap + i];
            }

            ws.residual.copy_from_slice(y);
            for (&si, &x) in selected.iter().zip(&ws.coef[..n]) {
                axpy(-x, &atoms[si * m..(si + 1) * m], &mut ws.residual);
            }
            r_norm = dot(&ws.residual, &ws.residual).sqrt();
            trace.push(r_norm);

            ws.alpha.copy_from_slice(&ws.corr0);
            for (&si, &x) in selected.iter().zip(&ws.coef[..n]) {
                axpy(-x, &gram[si * k..(si + 1) * k], &mut ws.alpha);
            }
        };

        let pairs = selected
            .iter()
            .zip(&ws.coef[..selected.len()])
            .map(|(&i, &v)| (i, v))
            .collect();
        Ok(OmpOutcome {
            code: SparseVector::from_pairs(k, pairs)?,
            selected,
            residual_trace: trace,
            stop,
        })
    }
}

/// Codes `y` with exactly `s` atoms (fewer on an exact fit).
pub fn omp_fixed_sparsity(y: &[f64], dict: &Dictionary, s: usize) -> Result<SparseVector> {
    SparseCoder::new(dict)
        .code(y, CodingMode::FixedSparsity(s))
        .map(|o| o.code)
}

/// Codes `y` until the residual norm is at most `eps` or `s_max` atoms are used.
pub fn omp_error_bound(
    y: &[f64],
    dict: &Dictionary,
    eps: f64,
    s_max: usize,
) -> Result<SparseVector> {
    SparseCoder::new(dict)
        .code(
            y,
            CodingMode::ErrorBound {
                eps,
                max_atoms: s_max,
            },
        )
        .map(|o| o.code)
}

pub fn omp_batch(data: &TrainingSet, dict: &Dictionary, mode: CodingMode) -> Result<SparseCodeMatrix> {
    SparseCoder::new(dict).code_batch(data, mode).map(|b| b.codes)
}

struct Workspace {
    corr0: Vec<f64>,
    alpha: Vec<f64>,
    in_support: Vec<bool>,
    chol: Vec<f64>,
    w: Vec<f64>,
    z: Vec<f64>,
    coef: Vec<f64>,
    residual: Vec<f64>,
}

impl Workspace {
    fn new(m: usize, k: usize, cap: usize) -> Self {
        Self {
            corr0: vec![0.0; k],
            alpha: vec![0.0; k],
            in_support: vec![false; k],
            chol: vec![0.0; cap * cap],
            w: vec![0.0; cap],
            z: vec![0.0; cap],
            coef: vec![0.0; cap],
            residual: vec![0.0; m],
        }
    }

    fn reset(&mut self) {
        self.in_support.iter_mut().for_each(|b| *b = false);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
