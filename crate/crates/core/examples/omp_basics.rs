//! Sparse coding a single signal with orthogonal matching pursuit, first with
//! a fixed number of atoms and then with an error bound.

use sparsedict::omp::{CodingMode, SparseCoder};
use sparsedict::synthesis::gen_dictionary;

fn main() -> sparsedict::Result<()> {
    let dict = gen_dictionary(16, 32, 3)?;

    // y = 2·d₄ − 0.5·d₁₁ + 1.5·d₂₀
    let mut y = vec![0.0; 16];
    for (j, c) in [(4, 2.0), (11, -0.5), (20, 1.5)] {
        for (yi, di) in y.iter_mut().zip(dict.atom(j).iter()) {
            *yi += c * di;
        }
    }

    let coder = SparseCoder::new(&dict);
    let fixed = coder.code(&y, CodingMode::FixedSparsity(3))?;
    println!("selected atoms, in order: {:?}", fixed.selected);
    println!("coefficients: {:?}", fixed.code.entries());
    println!("residual after each step: {:?}", fixed.residual_trace);

    let loose = coder.code(&y, CodingMode::ErrorBound { eps: 1.0, max_atoms: 16 })?;
    println!(
        "with ‖r‖ ≤ 1: {} atoms, residual {:.3}, stopped on {:?}",
        loose.code.nnz(),
        loose.residual_norm(),
        loose.stop
    );
    Ok(())
}
