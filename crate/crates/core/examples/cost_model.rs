//! Per-iteration cost of conventional training against split-and-merge, as the
//! number of shards grows.

use sparsedict::cost::{predict_costs, CostParams};

fn main() -> sparsedict::Result<()> {
    println!("    L   T_total/T1   same order");
    for shards in [1, 2, 5, 10, 20, 40, 80] {
        let p = CostParams {
            signals: 40_000,
            dim: 30,
            atoms: 60,
            sparsity: 6,
            shards,
            local_atoms: 50,
            local_sparsity: 3,
            merge_sparsity: 2,
        };
        let c = predict_costs(&p)?;
        println!("{shards:5}   {:10.3e}   {}", c.ratio, c.same_order);
    }
    Ok(())
}
