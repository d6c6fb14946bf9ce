//! Sparse coefficient vectors and column-sparse code matrices.

use nalgebra::{DMatrix, DVector};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

/// A length-`K` vector stored as `(index, value)` pairs with strictly
/// increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    len: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            entries: Vec::new(),
        }
    }

    /// Builds from unordered pairs. Exact zeros are dropped; duplicate or
    /// out-of-range indices are rejected.
    pub fn from_pairs(len: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.retain(|&(_, v)| v != 0.0);
        pairs.sort_by_key(|&(i, _)| i);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("duplicate index {}", w[0].0)));
            }
        }
        if let Some(&(i, _)) = pairs.last() {
            if i >= len {
                return Err(Error::InvalidInput(format!(
                    "index {i} out of range for length {len}"
                )));
            }
        }
        if pairs.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            len,
            entries: pairs,
        })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            len: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of nonzeros.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.len);
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    /// `D x`.
    pub fn synthesize(&self, dict: &Dictionary) -> DVector<f64> {
        self.synthesize_with(dict.matrix())
    }

    /// `D x` for an arbitrary `m x K` matrix `D`.
    pub fn synthesize_with(&self, atoms: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(atoms.nrows());
        for &(j, v) in &self.entries {
            out.axpy(v, &atoms.column(j), 1.0);
        }
        out
    }
}

/// `K x N` coefficient matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodeMatrix {
    rows: usize,
    columns: Vec<SparseVector>,
}

impl SparseCodeMatrix {
    pub fn new(rows: usize, columns: Vec<SparseVector>) -> Result<Self> {
        if let Some(c) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::Dimension(format!(
                "code column {c} has length {}, expected {rows}",
                columns[c].len()
            )));
        }
        Ok(Self { rows, columns })
    }

    pub fn empty(rows: usize) -> Self {
        Self {
            rows,
            columns: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &SparseVector {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<SparseVector> {
        self.columns
    }

    pub fn max_nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).max().unwrap_or(0)
    }

    pub fn total_nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.columns
            .iter()
            .map(SparseVector::norm_squared)
            .sum::<f64>()
            .sqrt()
    }

    /// Per-row count of nonzeros, i.e. how many signals use each atom.
    pub fn atom_usage(&self) -> Vec<usize> {
        let mut usage = vec![0; self.rows];
        for col in &self.columns {
            for j in col.support() {
                usage[j] += 1;
            }
        }
        usage
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.columns.len());
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col.entries() {
                out[(r, c)] = v;
            }
        }
        out
    }

    /// `D X` for an arbitrary `m x K` matrix `D`.
    pub fn synthesize_with(&self, atoms: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(atoms.nrows(), self.columns.len());
        for (c, col) in self.columns.iter().enumerate() {
            let mut dst = out.column_mut(c);
            for &(j, v) in col.entries() {
                dst.axpy(v, &atoms.column(j), 1.0);
            }
        }
        out
    }

    /// `‖Y − D X‖_F`.
    pub fn residual_norm(&self, data: &DMatrix<f64>, atoms: &DMatrix<f64>) -> f64 {
        let mut total = 0.0;
        let mut r = DVector::zeros(data.nrows());
        for (c, col) in self.columns.iter().enumerate() {
            r.copy_from(&data.column(c));
            for &(j, v) in col.entries() {
                r.axpy(-v, &atoms.column(j), 1.0);
            }
            total += r.norm_squared();
        }
        total.sqrt()
    }

    /// Per-column `‖y_i − D x_i‖₂`.
    pub fn column_residual_norms(&self, data: &DMatrix<f64>, atoms: &DMatrix<f64>) -> Vec<f64> {
        let mut r = DVector::zeros(data.nrows());
        self.columns
            .iter()
            .enumerate()
            .map(|(c, col)| {
                r.copy_from(&data.column(c));
                for &(j, v) in col.entries() {
                    r.axpy(-v, &atoms.column(j), 1.0);
                }
                r.norm()
            })
            .collect()
    }
}
