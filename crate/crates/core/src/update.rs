//! Method of optimal directions (MOD) dictionary update.
//!
//! For fixed codes `X` the dictionary minimizing `‖Y − DX‖_F` solves
//! `D (XXᵀ) = YXᵀ`. `XXᵀ` is symmetric positive semidefinite, so its
//! eigendecomposition doubles as the rank-revealing factorization: eigenvalues
//! below `1e-10 · λ_max` are treated as zero and the minimum-norm solution is
//! returned. Both `XXᵀ` and `YXᵀ` are accumulated directly from the sparse
//! columns of `X`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;

use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::sparse::SparseCodeMatrix;

/// Relative eigenvalue cutoff for the pseudo-inverse of `XXᵀ`.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Atoms with `|⟨d_i, d_j⟩|` above this are twins; the higher index is replaced.
pub const TWIN_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiagnostics {
    /// Atoms no signal used; their previous value was kept.
    pub unused_atoms: Vec<usize>,
    /// Filled in by [`replace_degenerate_atoms`] when it runs after the update.
    pub replaced_atoms: Vec<usize>,
    /// `‖Y − DX‖_F` for the least-squares `D`, before normalization.
    pub residual_fro: f64,
}

/// Result of [`replace_degenerate_atoms`].
#[derive(Debug, Clone)]
pub struct Replacement {
    pub dictionary: Dictionary,
    pub replaced: Vec<usize>,
    /// Degenerate atoms left in place because no data column was available.
    pub unfilled: Vec<usize>,
}

fn check_dims(data: &TrainingSet, codes: &SparseCodeMatrix, atoms: usize) -> Result<()> {
    if codes.ncols() != data.len() {
        return Err(Error::Dimension(format!(
            "{} code columns for {} signals",
            codes.ncols(),
            data.len()
        )));
    }
    if codes.rows() != atoms {
        return Err(Error::Dimension(format!(
            "codes have {} rows, dictionary has {atoms} atoms",
            codes.rows()
        )));
    }
    Ok(())
}

/// Least-squares dictionary `Y Xᵀ (X Xᵀ)⁺`, not normalized.
pub fn solve_mod(data: &TrainingSet, codes: &SparseCodeMatrix) -> Result<DMatrix<f64>> {
    check_dims(data, codes, codes.rows())?;
    let (m, k) = (data.dim(), codes.rows());
    let mut yxt = DMatrix::<f64>::zeros(m, k);
    let mut xxt = DMatrix::<f64>::zeros(k, k);
    for (c, col) in codes.columns().iter().enumerate() {
        let y = data.column(c);
        let entries = col.entries();
        for &(j, v) in entries {
            yxt.column_mut(j).axpy(v, &y, 1.0);
            for &(i, w) in entries {
                xxt[(i, j)] += w * v;
            }
        }
    }
    let eig = SymmetricEigen::new(xxt);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if lambda_max <= 0.0 {
        return Ok(DMatrix::zeros(m, k));
    }
    let cutoff = RANK_TOLERANCE * lambda_max;
    // D = (YXᵀ V) diag(1/λ) Vᵀ over the retained eigenpairs.
    let mut projected = &yxt * &eig.eigenvectors;
    for (mut col, &lambda) in projected.column_iter_mut().zip(eig.eigenvalues.iter()) {
        if lambda > cutoff {
            col /= lambda;
        } else {
            col.fill(0.0);
        }
    }
    Ok(projected * eig.eigenvectors.transpose())
}

/// Divides each nonzero column by its norm. Returns the original norms; zero
/// columns are left as they are and get scale 0.
pub fn normalize_columns(mut atoms: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let scales = atoms
        .column_iter_mut()
        .map(|mut col| {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
            norm
        })
        .collect();
    (atoms, scales)
}

/// One MOD step: least-squares solve, then column normalization.
///
/// Atoms whose solved column vanishes (unused atoms) keep their value from
/// `previous` and are listed in [`UpdateDiagnostics::unused_atoms`]; replacing
/// them is left to [`replace_degenerate_atoms`].
pub fn mod_update(
    data: &TrainingSet,
    codes: &SparseCodeMatrix,
    previous: &Dictionary,
) -> Result<(Dictionary, UpdateDiagnostics)> {
    check_dims(data, codes, previous.len())?;
    if data.dim() != previous.dim() {
        return Err(Error::Dimension(format!(
            "signals have dimension {}, dictionary {}",
            data.dim(),
            previous.dim()
        )));
    }
    if codes.total_nnz() == 0 {
        return Ok((
            previous.clone(),
            UpdateDiagnostics {
                unused_atoms: (0..previous.len()).collect(),
                replaced_atoms: Vec::new(),
                residual_fro: data.frobenius_norm(),
            },
        ));
    }
    let solved = solve_mod(data, codes)?;
    let residual_fro = codes.residual_norm(data.matrix(), &solved);
    let (mut atoms, scales) = normalize_columns(solved);
    let usage = codes.atom_usage();
    let mut unused_atoms = Vec::new();
    for j in 0..atoms.ncols() {
        if usage[j] == 0 || scales[j] == 0.0 || !scales[j].is_finite() {
            atoms.set_column(j, &previous.atom(j));
            unused_atoms.push(j);
        }
    }
    Ok((
        Dictionary::from_unit_columns_unchecked(atoms),
        UpdateDiagnostics {
            unused_atoms,
            replaced_atoms: Vec::new(),
            residual_fro,
        },
    ))
}

/// Atoms that are unused by `codes` or nearly duplicate a lower-indexed atom.
pub fn degenerate_atoms(dict: &Dictionary, codes: &SparseCodeMatrix) -> Vec<usize> {
    let usage = codes.atom_usage();
    let mut degenerate: Vec<bool> = usage.iter().map(|&u| u == 0).collect();
    let gram = dict.gram();
    for j in 0..dict.len() {
        if degenerate[j] {
            continue;
        }
        if (0..j).any(|i| !degenerate[i] && gram[(i, j)].abs() > TWIN_THRESHOLD) {
            degenerate[j] = true;
        }
    }
    degenerate
        .iter()
        .enumerate()
        .filter_map(|(j, &d)| d.then_some(j))
        .collect()
}

/// Replaces unused and twin atoms by the worst-represented training columns.
///
/// Columns are ranked by `‖y_i − D x_i‖₂` (largest first, lower index on
/// ties) and each is used at most once. When no column with a positive
/// residual remains, nonzero columns are drawn at random from `seed`.
pub fn replace_degenerate_atoms(
    dict: &Dictionary,
    data: &TrainingSet,
    codes: &SparseCodeMatrix,
    seed: u64,
) -> Result<Replacement> {
    check_dims(data, codes, dict.len())?;
    let targets = degenerate_atoms(dict, codes);
    if targets.is_empty() {
        return Ok(Replacement {
            dictionary: dict.clone(),
            replaced: Vec::new(),
            unfilled: Vec::new(),
        });
    }

    let residuals = codes.column_residual_norms(data.matrix(), dict.matrix());
    let mut ranked: Vec<usize> = (0..data.len()).filter(|&i| residuals[i] > 0.0).collect();
    ranked.sort_by(|&a, &b| residuals[b].total_cmp(&residuals[a]).then(a.cmp(&b)));

    let mut used = vec![false; data.len()];
    let mut candidates = ranked.into_iter();
    let mut fallback: Option<std::vec::IntoIter<usize>> = None;
    let mut atoms = dict.matrix().clone();
    let mut replaced = Vec::new();
    let mut unfilled = Vec::new();

    for &j in &targets {
        let mut pick = candidates.by_ref().find(|&i| !used[i]);
        if pick.is_none() {
            let pool = fallback.get_or_insert_with(|| {
                let mut all: Vec<usize> = (0..data.len())
                    .filter(|&i| data.column(i).norm() > 0.0)
                    .collect();
                all.shuffle(&mut rng::stream(seed, Purpose::AtomReplacement, 0));
                all.into_iter()
            });
            pick = pool.find(|&i| !used[i]);
        }
        match pick {
            Some(i) => {
                used[i] = true;
                let col = data.column(i);
                atoms.set_column(j, &(col / col.norm()));
                replaced.push(j);
            }
            None => unfilled.push(j),
        }
    }

    Ok(Replacement {
        dictionary: Dictionary::from_unit_columns_unchecked(atoms),
        replaced,
        unfilled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseVector;

    fn codes_from_dense(x: &DMatrix<f64>) -> SparseCodeMatrix {
        let cols = x
            .column_iter()
            .map(|c| SparseVector::from_dense(c.as_slice()))
            .collect();
        SparseCodeMatrix::new(x.nrows(), cols).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let m = DMatrix::from_column_slice(2, 3, &[3.0, 4.0, 1.0, 0.0, 0.0, 0.0]);
        let (n, scales) = normalize_columns(m);
        assert_eq!(n.column(0).as_slice(), &[0.6, 0.8]);
        assert_eq!(n.column(1).as_slice(), &[1.0, 0.0]);
        assert_eq!(n.column(2).as_slice(), &[0.0, 0.0]);
        assert_eq!(scales, vec![5.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_codes_give_normalized_data() {
        let y = DMatrix::from_column_slice(2, 2, &[3.0, 4.0, 0.0, 2.0]);
        let prev = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let x = codes_from_dense(&DMatrix::identity(2, 2));
        let (d, diag) = mod_update(&TrainingSet::new(y), &x, &prev).unwrap();
        assert!((d.matrix() - DMatrix::from_column_slice(2, 2, &[0.6, 0.8, 0.0, 1.0])).norm() < 1e-14);
        assert!(diag.residual_fro < 1e-12);
        assert!(diag.unused_atoms.is_empty());
    }

    #[test]
    fn fixed_point_when_data_is_exact() {
        let prev = crate::synthesis::gen_dictionary(4, 3, 11).unwrap();
        let x = DMatrix::from_fn(3, 9, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let y = prev.matrix() * &x;
        let (d, _) = mod_update(&TrainingSet::new(y), &codes_from_dense(&x), &prev).unwrap();
        assert!((d.matrix() - prev.matrix()).norm() < 1e-12);
    }

    #[test]
    fn all_zero_codes_return_previous() {
        let prev = crate::synthesis::gen_dictionary(3, 4, 1).unwrap();
        let y = TrainingSet::new(DMatrix::from_element(3, 5, 1.0));
        let x = SparseCodeMatrix::new(4, vec![SparseVector::zeros(4); 5]).unwrap();
        let (d, diag) = mod_update(&y, &x, &prev).unwrap();
        assert_eq!(d, prev);
        assert_eq!(diag.unused_atoms, vec![0, 1, 2, 3]);
    }

    #[test]
    fn unused_atom_keeps_previous_value() {
        let prev = crate::synthesis::gen_dictionary(3, 3, 5).unwrap();
        let x = DMatrix::from_row_slice(3, 4, &[1.0, 0.0, 2.0, 1.0, 0.0, 1.0, 1.0, 3.0, 0.0, 0.0, 0.0, 0.0]);
        let y = DMatrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64 + 0.5);
        let (d, diag) = mod_update(&TrainingSet::new(y), &codes_from_dense(&x), &prev).unwrap();
        assert_eq!(diag.unused_atoms, vec![2]);
        assert_eq!(d.atom(2), prev.atom(2));
    }

    #[test]
    fn no_degenerate_atoms_means_no_change() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let y = TrainingSet::new(DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let x = codes_from_dense(&DMatrix::identity(2, 2));
        let r = replace_degenerate_atoms(&d, &y, &x, 0).unwrap();
        assert!(r.replaced.is_empty());
        assert_eq!(r.dictionary, d);
    }

    #[test]
    fn unused_atom_takes_worst_represented_column() {
        // Residuals of the four columns: 0, 0.5, 2.0, 1.0 (recomputed by hand
        // from y_i − D x_i with D = I₃ restricted to the codes below).
        let d = Dictionary::new(DMatrix::identity(3, 3)).unwrap();
        let y = DMatrix::from_column_slice(3, 4, &[
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.5, //
            1.0, 0.0, 2.0, //
            0.0, 1.0, 1.0,
        ]);
        let x = DMatrix::from_column_slice(3, 4, &[
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0,
        ]);
        let r = replace_degenerate_atoms(&d, &TrainingSet::new(y), &codes_from_dense(&x), 0).unwrap();
        assert_eq!(r.replaced, vec![2]);
        let expected = [1.0 / 5f64.sqrt(), 0.0, 2.0 / 5f64.sqrt()];
        for (a, b) in r.dictionary.atom(2).iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn twin_pair_loses_exactly_one_atom() {
        let mut m = DMatrix::identity(3, 3);
        m.set_column(2, &m.column(0).into_owned());
        let d = Dictionary::new(m).unwrap();
        let y = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let x = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = replace_degenerate_atoms(&d, &TrainingSet::new(y), &codes_from_dense(&x), 0).unwrap();
        assert_eq!(r.replaced, vec![2]);
        assert_eq!(r.dictionary.atom(0), d.atom(0));
    }

    #[test]
    fn too_few_columns_leaves_remainder_flagged() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let y = TrainingSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
        let x = SparseCodeMatrix::new(2, vec![SparseVector::zeros(2)]).unwrap();
        let r = replace_degenerate_atoms(&d, &y, &x, 3).unwrap();
        assert_eq!(r.replaced, vec![0]);
        assert_eq!(r.unfilled, vec![1]);
    }
}
