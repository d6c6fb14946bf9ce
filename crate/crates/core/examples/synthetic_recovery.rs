//! Recover a known 30×60 dictionary from 40 000 noiseless 6-sparse signals,
//! once with the conventional trainer and once with split-and-merge.
//!
//! ```text
//! cargo run --release --example synthetic_recovery -- [seed] [iterations] [local iterations] [merge iterations]
//! ```
//!
//! Local iterations default to 15 and merge iterations to `iterations`; on a
//! single core the local phase dominates the split-merge time.

use sparsedict::metrics::{atom_recovery, RECOVERY_THRESHOLD};
use sparsedict::synthesis::SyntheticSpec;
use sparsedict::{train_split_merge, train_standard, SplitMergeParams, TrainConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0);
    let iterations: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(100);
    let local_iterations: Option<usize> = Some(args.next().map(|a| a.parse()).transpose()?.unwrap_or(15));
    let merge_iterations: Option<usize> = args.next().map(|a| a.parse()).transpose()?;

    let (truth, data, _) = SyntheticSpec::reference(seed).generate()?;

    let standard = train_standard(&data, &TrainConfig::standard(60, 6, iterations).with_seed(seed))?;
    println!(
        "standard     {:7.2} s  recovery {:6.2}%  mse {:7.2} dB",
        standard.report.wall_time_s,
        atom_recovery(&truth, &standard.dictionary, RECOVERY_THRESHOLD)?,
        standard.report.final_mse_db
    );

    let params = SplitMergeParams {
        shards: 40,
        local_atoms: 50,
        local_sparsity: 3,
        merge_sparsity: 2,
        local_iterations,
        merge_iterations,
    };
    let split = train_split_merge(&data, &TrainConfig::split_merge(60, 6, iterations, params).with_seed(seed))?;
    println!(
        "split-merge  {:7.2} s  recovery {:6.2}%  mse {:7.2} dB",
        split.report.wall_time_s,
        atom_recovery(&truth, &split.dictionary, RECOVERY_THRESHOLD)?,
        split.report.final_mse_db
    );
    println!(
        "  split {:.3} s, locals {:.2} s, merge {:.2} s, evaluation {:.2} s",
        split.report.split_time_s,
        split.report.local_wall_times_s.iter().sum::<f64>(),
        split.report.merge_wall_time_s,
        split.report.evaluation_time_s
    );
    println!(
        "speedup      {:.2}x",
        standard.report.wall_time_s / split.report.wall_time_s
    );
    Ok(())
}
