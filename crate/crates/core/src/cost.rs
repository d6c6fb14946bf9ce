//! Analytic per-iteration cost model of both trainers, with the unknown
//! constant factor set to 1.
//!
//! One alternating iteration over `n` signals costs `n (K s m + m² + n²)`:
//! OMP is `O(s m K)` per signal and the dictionary update is charged as an SVD
//! of an `m × n` matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    /// Training signals `N`.
    pub signals: u64,
    /// Signal dimension `m`.
    pub dim: u64,
    /// Global atoms `K`.
    pub atoms: u64,
    /// Global sparsity `s`.
    pub sparsity: u64,
    /// Shards `L`.
    pub shards: u64,
    /// Local atoms `K₁`.
    pub local_atoms: u64,
    pub local_sparsity: u64,
    pub merge_sparsity: u64,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.signals,
            self.dim,
            self.atoms,
            self.sparsity,
            self.shards,
            self.local_atoms,
            self.local_sparsity,
            self.merge_sparsity,
        ];
        if all.contains(&0) {
            return Err(Error::InvalidInput("cost parameters must be positive".into()));
        }
        if self.local_sparsity * self.merge_sparsity != self.sparsity {
            return Err(Error::InvalidInput(format!(
                "s1*s2 = {}*{} must equal s = {}",
                self.local_sparsity, self.merge_sparsity, self.sparsity
            )));
        }
        Ok(())
    }

    /// `K₁L` and `N/L` within a factor of 4 of each other.
    pub fn same_order(&self) -> bool {
        let merged = (self.local_atoms * self.shards) as f64;
        let shard = self.signals as f64 / self.shards as f64;
        let ratio = merged / shard;
        (0.25..=4.0).contains(&ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPrediction {
    /// One iteration of the conventional trainer.
    pub standard: f64,
    /// One iteration of one local subproblem.
    pub local: f64,
    /// All local subproblems plus the merge, one iteration each.
    pub split_merge_total: f64,
    /// `split_merge_total / standard`.
    pub ratio: f64,
    pub same_order: bool,
}

/// `T₁`, `T₂` and `T_total` in units of the model constant.
pub fn predict_costs(p: &CostParams) -> Result<CostPrediction> {
    p.validate()?;
    let n = p.signals as f64;
    let m = p.dim as f64;
    let k = p.atoms as f64;
    let s = p.sparsity as f64;
    let l = p.shards as f64;
    let k1 = p.local_atoms as f64;
    let s1 = p.local_sparsity as f64;
    let s2 = p.merge_sparsity as f64;

    let shard = n / l;
    let merged = k1 * l;
    let standard = n * (k * s * m + m * m + n * n);
    let local = shard * (k1 * s1 * m + m * m + shard * shard);
    let split_merge_total =
        n * (k1 * s1 * m + m * m + shard * shard) + merged * (k * s2 * m + m * m + merged * merged);
    Ok(CostPrediction {
        standard,
        local,
        split_merge_total,
        ratio: split_merge_total / standard,
        same_order: p.same_order(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn single_shard_local_equals_standard() {
        let p = CostParams {
            shards: 1,
            local_atoms: 60,
            local_sparsity: 6,
            merge_sparsity: 1,
            ..reference()
        };
        let c = predict_costs(&p).unwrap();
        assert_eq!(c.local, c.standard);
    }

    #[test]
    fn reference_split_is_cheaper_and_same_order() {
        let c = predict_costs(&reference()).unwrap();
        assert!(c.split_merge_total < c.standard);
        assert!(c.same_order);
    }

    #[test]
    fn rejects_inconsistent_sparsity() {
        let p = CostParams {
            local_sparsity: 4,
            ..reference()
        };
        assert!(predict_costs(&p).is_err());
    }
}
