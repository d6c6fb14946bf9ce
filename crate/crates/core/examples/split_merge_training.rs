//! The split-and-merge stages one at a time: shard the data, train the local
//! dictionaries, stack the scaled local atoms and learn the global dictionary
//! from them.

use sparsedict::metrics::{atom_recovery, mse_db, RECOVERY_THRESHOLD};
use sparsedict::omp::{omp_batch, CodingMode};
use sparsedict::synthesis::SyntheticSpec;
use sparsedict::trainer::{merge_dictionaries, merge_training_set, split_dataset, train_local};
use sparsedict::InitStrategy;

fn main() -> sparsedict::Result<()> {
    let spec = SyntheticSpec {
        dim: 20,
        atoms: 40,
        signals: 8000,
        sparsity: 4,
        seed: 11,
    };
    let (truth, data, _) = spec.generate()?;

    let shards = split_dataset(&data, 8, spec.seed)?;
    let mut locals = Vec::new();
    for (t, shard) in shards.iter().enumerate() {
        let local = train_local(shard, 32, 2, 30, &InitStrategy::FirstColumns, t as u64)?;
        println!("shard {t}: {} signals, code energy {:.1}", shard.len(), local.1.frobenius_norm());
        locals.push(local);
    }

    let stacked = merge_training_set(&locals)?;
    println!("merge set: {} scaled local atoms", stacked.len());

    let merged = merge_dictionaries(&locals, 40, 2, 30, &InitStrategy::FirstColumns, 0)?;
    let codes = omp_batch(&data, &merged.dictionary, CodingMode::FixedSparsity(4))?;
    println!(
        "global dictionary: recovery {:.1}%, training MSE {:.2} dB",
        atom_recovery(&truth, &merged.dictionary, RECOVERY_THRESHOLD)?,
        mse_db(&data, &merged.dictionary, &codes)?
    );
    Ok(())
}
