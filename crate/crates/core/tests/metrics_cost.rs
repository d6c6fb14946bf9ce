mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use sparsedict::cost::{predict_costs, CostParams};
use sparsedict::metrics::{atom_recovery, mse_db, RECOVERY_THRESHOLD};
use sparsedict::omp::{omp_batch, CodingMode};
use sparsedict::synthesis::{gen_dictionary, gen_signals};
use sparsedict::{Dictionary, SparseCodeMatrix, TrainingSet};

fn reference() -> CostParams {
    CostParams {
        signals: 40_000,
        dim: 30,
        atoms: 60,
        sparsity: 6,
        shards: 40,
        local_atoms: 50,
        local_sparsity: 3,
        merge_sparsity: 2,
    }
}

/// The three cost formulas, evaluated term by term in a different order.
fn costs_by_hand(p: &CostParams) -> (f64, f64, f64) {
    let [n, m, k, s, l, k1, s1, s2] = [
        p.signals, p.dim, p.atoms, p.sparsity, p.shards, p.local_atoms, p.local_sparsity, p.merge_sparsity,
    ]
    .map(|v| v as f64);
    let t1 = n * k * s * m + n * m * m + n.powi(3);
    let t2 = (n / l) * k1 * s1 * m + (n / l) * m * m + (n / l).powi(3);
    let local = n * k1 * s1 * m + n * m * m + n.powi(3) / (l * l);
    let merge = (k1 * l) * k * s2 * m + (k1 * l) * m * m + (k1 * l).powi(3);
    (t1, t2, local + merge)
}

#[test]
fn reference_costs_match_second_evaluation() {
    let p = reference();
    let c = predict_costs(&p).unwrap();
    let (t1, t2, total) = costs_by_hand(&p);
    assert!((c.standard - t1).abs() <= 1e-12 * t1);
    assert!((c.local - t2).abs() <= 1e-12 * t2);
    assert!((c.split_merge_total - total).abs() <= 1e-12 * total);
    assert!((c.ratio - total / t1).abs() <= 1e-12);
    assert!(c.split_merge_total < c.standard);
}

#[test]
fn total_cost_falls_with_shards_while_merge_is_small() {
    let base = reference();
    let mut previous = f64::INFINITY;
    for l in 1..=200u64 {
        let p = CostParams { shards: l, ..base };
        if p.local_atoms * l * l > p.signals {
            break;
        }
        let c = predict_costs(&p).unwrap();
        assert!(c.split_merge_total < previous, "L = {l}");
        previous = c.split_merge_total;
    }
}

#[test]
fn recovery_counts_replaced_atoms() {
    let mut r = common::rng(8);
    let truth = gen_dictionary(30, 60, 1).unwrap();
    let mut cols: Vec<usize> = (0..60).collect();
    cols.shuffle(&mut r);
    let mut estimate = truth.matrix().select_columns(&cols);
    let fresh = common::gaussian(&mut r, 30, 6);
    for n in 0..6 {
        estimate.set_column(n, &fresh.column(n));
    }
    let estimate = Dictionary::from_columns(estimate).unwrap();

    // Count by hand which true atoms still have a partner at the threshold.
    let expected = (0..60)
        .filter(|&i| (0..60).any(|j| truth.atom(i).dot(&estimate.atom(j)).abs() >= RECOVERY_THRESHOLD))
        .count();
    assert_eq!(expected, 54);
    assert_eq!(atom_recovery(&truth, &estimate, RECOVERY_THRESHOLD).unwrap(), 90.0);
}

#[test]
fn half_corrupted_dictionary_recovers_half() {
    let mut r = common::rng(9);
    let truth = gen_dictionary(12, 20, 2).unwrap();
    let mut m = truth.matrix().clone();
    let fresh = common::gaussian(&mut r, 12, 10);
    m.columns_mut(10, 10).copy_from(&fresh);
    let estimate = Dictionary::from_columns(m).unwrap();
    assert_eq!(atom_recovery(&truth, &estimate, RECOVERY_THRESHOLD).unwrap(), 50.0);
}

#[test]
fn mse_is_scale_invariant() {
    let d = gen_dictionary(10, 20, 3).unwrap();
    let (y, _) = gen_signals(&d, 100, 3, 3).unwrap();
    let x = omp_batch(&y, &d, CodingMode::FixedSparsity(2)).unwrap();
    let base = mse_db(&y, &d, &x).unwrap();
    for alpha in [-3.0, 0.01, 250.0] {
        let ys = TrainingSet::new(y.matrix() * alpha);
        let xs = SparseCodeMatrix::new(
            20,
            x.columns()
                .iter()
                .map(|c| {
                    sparsedict::SparseVector::from_pairs(20, c.entries().iter().map(|&(i, v)| (i, v * alpha)).collect())
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();
        assert!((mse_db(&ys, &d, &xs).unwrap() - base).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recovery_ignores_permutation_and_sign(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let truth = Dictionary::from_columns(common::gaussian(&mut r, 8, 14)).unwrap();
        let other = Dictionary::from_columns(common::gaussian(&mut r, 8, 14)).unwrap();
        let base = atom_recovery(&truth, &other, 0.9).unwrap();
        let mut cols: Vec<usize> = (0..14).collect();
        cols.shuffle(&mut r);
        let mut permuted = other.matrix().select_columns(&cols);
        for j in (0..14).step_by(3) {
            permuted.column_mut(j).neg_mut();
        }
        let permuted = Dictionary::new(permuted).unwrap();
        prop_assert_eq!(atom_recovery(&truth, &permuted, 0.9).unwrap(), base);
        let flipped = Dictionary::new(-truth.matrix().clone()).unwrap();
        prop_assert_eq!(atom_recovery(&flipped, &other, 0.9).unwrap(), base);
    }
}
