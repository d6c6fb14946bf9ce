//! Overcomplete separable DCT dictionaries for square patches.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

/// `q` oversampled 1-D cosines of length `p`: `v_k[i] = cos(π k i / q)`, every
/// non-constant vector made zero-mean, all normalized.
pub fn cosine_basis(p: usize, q: usize) -> Vec<DVector<f64>> {
    (0..q)
        .map(|k| {
            let mut v = DVector::from_fn(p, |i, _| (PI * k as f64 * i as f64 / q as f64).cos());
            if k > 0 {
                let mean = v.mean();
                v.add_scalar_mut(-mean);
            }
            v.normalize()
        })
        .collect()
}

/// Atom for vertical frequency `k` and horizontal frequency `l`, vectorized
/// like a patch (`i + p·j`).
fn separable_atom(vertical: &DVector<f64>, horizontal: &DVector<f64>) -> DVector<f64> {
    let p = vertical.len();
    DVector::from_fn(p * p, |idx, _| vertical[idx % p] * horizontal[idx / p])
}

/// The `p² × q²` overcomplete DCT with `K = q²`. Atom `k + q·l` pairs vertical
/// frequency `k` with horizontal frequency `l`; atom 0 is the constant patch.
pub fn overcomplete_dct(p: usize, atoms: usize) -> Result<Dictionary> {
    let q = (atoms as f64).sqrt().round() as usize;
    if q * q != atoms {
        return Err(Error::InvalidInput(format!(
            "overcomplete DCT needs a square atom count, got {atoms}"
        )));
    }
    if p == 0 || q < p {
        return Err(Error::InvalidInput(format!(
            "{atoms} atoms is fewer than the {} needed for {p}x{p} patches",
            p * p
        )));
    }
    let basis = cosine_basis(p, q);
    let mut cols = Vec::with_capacity(atoms);
    for l in 0..q {
        for k in 0..q {
            cols.push(separable_atom(&basis[k], &basis[l]));
        }
    }
    Dictionary::from_columns(DMatrix::from_columns(&cols))
}

/// `atoms` DCT atoms for any count: the square dictionary when `atoms` is a
/// square of at least `p`, otherwise the lowest-frequency atoms (by `k + l`,
/// then `l`) of the DCT with `q = max(p, ⌈√atoms⌉)`.
pub fn overcomplete_dct_lowest(p: usize, atoms: usize) -> Result<Dictionary> {
    if p == 0 || atoms == 0 {
        return Err(Error::InvalidInput("patch size and atom count must be positive".into()));
    }
    let root = (atoms as f64).sqrt().round() as usize;
    if root * root == atoms && root >= p {
        return overcomplete_dct(p, atoms);
    }
    let mut q = p.max((atoms as f64).sqrt().ceil() as usize);
    while q * q < atoms {
        q += 1;
    }
    let basis = cosine_basis(p, q);
    let mut pairs: Vec<(usize, usize)> = (0..q).flat_map(|l| (0..q).map(move |k| (k, l))).collect();
    pairs.sort_by_key(|&(k, l)| (k + l, l, k));
    let cols: Vec<_> = pairs[..atoms]
        .iter()
        .map(|&(k, l)| separable_atom(&basis[k], &basis[l]))
        .collect();
    Dictionary::from_columns(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_shape_and_dc_atom() {
        let d = overcomplete_dct(8, 256).unwrap();
        assert_eq!((d.dim(), d.len()), (64, 256));
        assert!(d.atom(0).iter().all(|&v| (v - 0.125).abs() < 1e-15));
    }

    #[test]
    fn atoms_are_distinct() {
        let d = overcomplete_dct(8, 256).unwrap();
        let g = d.gram();
        for i in 0..d.len() {
            assert!((g[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(g[(i, j)].abs() < 1.0 - 1e-9, "atoms {i},{j}: {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn non_square_count_is_rejected() {
        assert!(overcomplete_dct(8, 128).is_err());
        assert!(overcomplete_dct(8, 49).is_err());
    }

    #[test]
    fn lowest_frequency_subset() {
        let d = overcomplete_dct_lowest(8, 128).unwrap();
        assert_eq!((d.dim(), d.len()), (64, 128));
        assert!(d.atom(0).iter().all(|&v| (v - 0.125).abs() < 1e-15));
        assert_eq!(overcomplete_dct_lowest(8, 256).unwrap(), overcomplete_dct(8, 256).unwrap());
    }
}
