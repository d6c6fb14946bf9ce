//! A signal that is sparse over intermediate atoms, which are themselves
//! nearly sparse over a final dictionary, is nearly sparse over the final
//! dictionary with the product sparsity.

use nalgebra::{DMatrix, DVector};
use sparsedict::synthesis::{composition_bound_check, gen_dictionary};
use sparsedict::{SparseCodeMatrix, SparseVector};

fn main() -> sparsedict::Result<()> {
    let d = gen_dictionary(6, 10, 5)?;

    // Four intermediate atoms, each 2-sparse over D.
    let z = SparseCodeMatrix::new(
        10,
        vec![
            SparseVector::from_pairs(10, vec![(0, 1.0), (3, -0.4)])?,
            SparseVector::from_pairs(10, vec![(1, 0.7), (8, 0.2)])?,
            SparseVector::from_pairs(10, vec![(5, 1.1), (9, 0.3)])?,
            SparseVector::from_pairs(10, vec![(2, -0.6), (7, 0.9)])?,
        ],
    )?;
    let e = DMatrix::from_fn(6, 4, |i, j| 1e-3 * ((i + 2 * j) as f64).sin());
    let x1 = SparseVector::from_pairs(4, vec![(0, 2.0), (2, -1.0)])?;
    let e1 = DVector::from_fn(6, |i, _| 1e-3 * (i as f64).cos());

    let check = composition_bound_check(d.matrix(), &z, &e, &x1, &e1)?;
    println!("‖y − DZx₁‖ = {:.3e} ≤ {:.3e}: {}", check.lhs, check.rhs, check.holds);
    println!(
        "support {} ≤ {}: {}",
        check.composed_nnz, check.support_bound, check.support_bound_holds
    );
    Ok(())
}
