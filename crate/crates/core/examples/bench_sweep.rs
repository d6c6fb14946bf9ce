//! Measured and predicted cost of split-and-merge over a sweep of shard counts,
//! written as JSON and CSV.

use sparsedict::bench::{bench_sweep, write_sweep_csv};
use sparsedict::synthesis::SyntheticSpec;
use sparsedict::{SplitMergeParams, TrainConfig};

fn main() -> anyhow::Result<()> {
    let spec = SyntheticSpec {
        signals: 10_000,
        ..SyntheticSpec::reference(0)
    };
    let (truth, data, _) = spec.generate()?;
    let standard = TrainConfig::standard(60, 6, 30);
    let split = TrainConfig::split_merge(
        60,
        6,
        30,
        SplitMergeParams {
            shards: 1,
            local_atoms: 50,
            local_sparsity: 3,
            merge_sparsity: 2,
            local_iterations: None,
            merge_iterations: None,
        },
    );
    let reports = bench_sweep(&data, &standard, &split, &[2, 5, 10, 20], Some(&truth))?;

    println!("    L  speedup  predicted T_total/T1  recovery");
    for r in &reports {
        println!(
            "{:5}  {:7.2}  {:20.4}  {:7.1}%",
            r.params.split.shards,
            r.speedup,
            r.predicted_ratio,
            r.split_merge.atom_recovery_pct.unwrap_or(f64::NAN)
        );
    }
    let csv = std::env::temp_dir().join("sparsedict-sweep.csv");
    write_sweep_csv(&csv, &reports)?;
    println!("wrote {}", csv.display());
    Ok(())
}
