//! Dense matrix newtypes: [`Dictionary`] (unit-norm atoms) and [`TrainingSet`]
//! (one signal per column).

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};

/// Allowed deviation of an atom's norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// An `m x K` matrix whose columns (atoms) have unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
}

impl Dictionary {
    /// Wraps a matrix whose columns are already unit norm.
    pub fn new(atoms: DMatrix<f64>) -> Result<Self> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "dictionary must be at least 1x1, got {}x{}",
                atoms.nrows(),
                atoms.ncols()
            )));
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dictionary has non-finite entries".into()));
        }
        for (j, col) in atoms.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "atom {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// Normalizes every column. Fails on a zero (or non-finite) column.
    pub fn from_columns(mut atoms: DMatrix<f64>) -> Result<Self> {
        for (j, mut col) in atoms.column_iter_mut().enumerate() {
            let norm = col.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "column {j} has norm {norm} and cannot be normalized"
                )));
            }
            col /= norm;
        }
        Self::new(atoms)
    }

    pub(crate) fn from_unit_columns_unchecked(atoms: DMatrix<f64>) -> Self {
        debug_assert!(atoms
            .column_iter()
            .all(|c| (c.norm() - 1.0).abs() <= UNIT_NORM_TOLERANCE));
        Self { atoms }
    }

    /// Signal dimension.
    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    pub fn atom(&self, j: usize) -> DVectorView<'_, f64> {
        self.atoms.column(j)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.atoms
    }

    /// `DᵀD`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.atoms.tr_mul(&self.atoms)
    }
}

/// An `m x N` data matrix, one training signal per column.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    data: DMatrix<f64>,
}

impl TrainingSet {
    pub fn new(data: DMatrix<f64>) -> Self {
        Self { data }
    }

    pub fn from_columns(dim: usize, columns: &[DVector<f64>]) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| c.len() != dim) {
            return Err(Error::Dimension(format!(
                "column {bad} has length {}, expected {dim}",
                columns[bad].len()
            )));
        }
        if columns.is_empty() {
            return Ok(Self::new(DMatrix::zeros(dim, 0)));
        }
        Ok(Self::new(DMatrix::from_columns(columns)))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn column(&self, i: usize) -> DVectorView<'_, f64> {
        self.data.column(i)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// New set made of the given columns, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::new(self.data.select_columns(indices))
    }

    /// The first `k` columns as a normalized dictionary.
    pub fn leading_columns_as_dictionary(&self, k: usize) -> Result<Dictionary> {
        if k > self.len() {
            return Err(Error::InvalidInput(format!(
                "cannot take {k} initial atoms from {} training columns",
                self.len()
            )));
        }
        Dictionary::from_columns(self.data.columns(0, k).into_owned())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }
}
