//! Dictionary training: the conventional whole-dataset loop and split-and-merge.
//!
//! One round of the conventional loop codes every signal with OMP at fixed
//! sparsity, solves for the dictionary with MOD, and replaces degenerate atoms.
//!
//! Split-and-merge shuffles the columns into `L` disjoint shards, trains a
//! `K₁`-atom dictionary at sparsity `s₁` on each shard (in parallel), and then
//! trains the final `K`-atom dictionary at sparsity `s₂` on the matrix of all
//! local atoms, each local dictionary scaled by the Frobenius norm of its own
//! code matrix. With `s = s₁s₂` every signal keeps an `s`-sparse route through
//! the merged dictionary.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoise::dct;
use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::metrics;
use crate::omp::{CodingMode, SparseCoder};
use crate::rng::{self, Purpose};
use crate::sparse::SparseCodeMatrix;
use crate::update::{mod_update, replace_degenerate_atoms};

/// How the first dictionary of a training run is chosen.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// The first `K` training columns, normalized.
    #[default]
    FirstColumns,
    /// Separable overcomplete DCT over `√m × √m` patches.
    OvercompleteDct,
    /// A dictionary read from an SDICT file.
    Explicit { path: PathBuf },
}

/// Parameters of the split-and-merge scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitMergeParams {
    /// Number of shards `L`.
    pub shards: usize,
    /// Atoms per local dictionary, `K₁`.
    pub local_atoms: usize,
    /// Local sparsity `s₁`.
    pub local_sparsity: usize,
    /// Merge sparsity `s₂`.
    pub merge_sparsity: usize,
    /// Defaults to the global iteration count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_iterations: Option<usize>,
    /// Defaults to the global iteration count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    #[default]
    Standard,
    SplitMerge(SplitMergeParams),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Global atom count `K`.
    pub atoms: usize,
    /// Global sparsity `s`.
    pub sparsity: usize,
    pub iterations: usize,
    #[serde(default)]
    pub init: InitStrategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: TrainMode,
}

impl TrainConfig {
    pub fn standard(atoms: usize, sparsity: usize, iterations: usize) -> Self {
        Self {
            atoms,
            sparsity,
            iterations,
            init: InitStrategy::FirstColumns,
            seed: 0,
            mode: TrainMode::Standard,
        }
    }

    pub fn split_merge(atoms: usize, sparsity: usize, iterations: usize, params: SplitMergeParams) -> Self {
        Self {
            mode: TrainMode::SplitMerge(params),
            ..Self::standard(atoms, sparsity, iterations)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: InitStrategy) -> Self {
        self.init = init;
        self
    }

    /// Checks everything that can be checked without the data.
    pub fn validate(&self) -> Result<()> {
        if self.atoms == 0 || self.sparsity == 0 {
            return Err(Error::Config("atoms and sparsity must be positive".into()));
        }
        if self.sparsity > self.atoms {
            return Err(Error::Config(format!(
                "sparsity {} exceeds atom count {}",
                self.sparsity, self.atoms
            )));
        }
        if let TrainMode::SplitMerge(p) = &self.mode {
            if p.shards == 0 {
                return Err(Error::Config("split-merge needs at least one shard".into()));
            }
            if p.local_atoms == 0 || p.local_atoms > self.atoms {
                return Err(Error::Config(format!(
                    "local atom count K1={} must lie in 1..=K={}",
                    p.local_atoms, self.atoms
                )));
            }
            if p.local_sparsity == 0 || p.merge_sparsity == 0 {
                return Err(Error::Config("local and merge sparsity must be positive".into()));
            }
            if p.local_sparsity * p.merge_sparsity != self.sparsity {
                return Err(Error::Config(format!(
                    "local sparsity s1={} times merge sparsity s2={} must equal s={} (s1*s2 = s)",
                    p.local_sparsity, p.merge_sparsity, self.sparsity
                )));
            }
            if p.local_atoms * p.shards < self.atoms {
                return Err(Error::Config(format!(
                    "{} shards of {} local atoms cannot seed a {}-atom merge",
                    p.shards, p.local_atoms, self.atoms
                )));
            }
            if p.local_sparsity > p.local_atoms {
                return Err(Error::Config(format!(
                    "local sparsity {} exceeds local atom count {}",
                    p.local_sparsity, p.local_atoms
                )));
            }
        }
        Ok(())
    }

    fn check_data(&self, data: &TrainingSet) -> Result<()> {
        if data.is_empty() {
            return Err(Error::InvalidInput("training set is empty".into()));
        }
        if self.sparsity > data.dim() {
            return Err(Error::InvalidInput(format!(
                "sparsity {} exceeds signal dimension {}",
                self.sparsity,
                data.dim()
            )));
        }
        if let TrainMode::SplitMerge(p) = &self.mode {
            if p.shards > data.len() {
                return Err(Error::InvalidInput(format!(
                    "{} shards requested for {} signals",
                    p.shards,
                    data.len()
                )));
            }
        }
        Ok(())
    }
}

/// Timings and residual traces of a training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: String,
    /// Training MSE in dB of the returned dictionary on the full training set.
    pub final_mse_db: f64,
    /// `‖Y − DX‖_F` right after each sparse-coding pass (merge stage for
    /// split-and-merge).
    pub coding_residuals: Vec<f64>,
    /// `‖Y − DX‖_F` right after each least-squares update, same codes.
    pub update_residuals: Vec<f64>,
    pub replaced_atoms: usize,
    /// Training time, excluding the final evaluation pass.
    pub wall_time_s: f64,
    pub split_time_s: f64,
    pub local_wall_times_s: Vec<f64>,
    pub local_mse_db: Vec<f64>,
    pub merge_wall_time_s: f64,
    /// Coding the full data with the result to report `final_mse_db`.
    pub evaluation_time_s: f64,
}

/// A trained dictionary with the codes of its training data.
#[derive(Debug, Clone)]
pub struct Trained {
    pub dictionary: Dictionary,
    pub codes: SparseCodeMatrix,
    pub report: TrainReport,
}

/// Starting dictionary for `data` under `init`.
pub fn initial_dictionary(data: &TrainingSet, atoms: usize, init: &InitStrategy) -> Result<Dictionary> {
    let dict = match init {
        InitStrategy::FirstColumns => data.leading_columns_as_dictionary(atoms)?,
        InitStrategy::OvercompleteDct => {
            let p = (data.dim() as f64).sqrt().round() as usize;
            if p * p != data.dim() {
                return Err(Error::InvalidInput(format!(
                    "DCT initialization needs square patches, signal dimension is {}",
                    data.dim()
                )));
            }
            dct::overcomplete_dct_lowest(p, atoms)?
        }
        InitStrategy::Explicit { path } => crate::io::read_dictionary(path)?,
    };
    if dict.dim() != data.dim() || dict.len() != atoms {
        return Err(Error::Dimension(format!(
            "initial dictionary is {}x{}, expected {}x{atoms}",
            dict.dim(),
            dict.len(),
            data.dim()
        )));
    }
    Ok(dict)
}

struct Alternation {
    dictionary: Dictionary,
    codes: SparseCodeMatrix,
    coding_residuals: Vec<f64>,
    update_residuals: Vec<f64>,
    replaced: usize,
}

/// The alternating loop shared by every trainer.
fn alternate(
    data: &TrainingSet,
    mut dict: Dictionary,
    sparsity: usize,
    iterations: usize,
    seed: u64,
) -> Result<Alternation> {
    let mode = CodingMode::FixedSparsity(sparsity);
    let mut coding_residuals = Vec::with_capacity(iterations);
    let mut update_residuals = Vec::with_capacity(iterations);
    let mut replaced = 0;
    for it in 0..iterations {
        let codes = SparseCoder::new(&dict).code_batch(data, mode)?.codes;
        coding_residuals.push(codes.residual_norm(data.matrix(), dict.matrix()));
        let (updated, diag) = mod_update(data, &codes, &dict)?;
        update_residuals.push(diag.residual_fro);
        let seed = rng::derive_seed(seed, Purpose::AtomReplacement, it as u64);
        let replacement = replace_degenerate_atoms(&updated, data, &codes, seed)?;
        replaced += replacement.replaced.len();
        dict = replacement.dictionary;
    }
    let codes = SparseCoder::new(&dict).code_batch(data, mode)?.codes;
    Ok(Alternation {
        dictionary: dict,
        codes,
        coding_residuals,
        update_residuals,
        replaced,
    })
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Conventional training on the whole data matrix.
pub fn train_standard(data: &TrainingSet, cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if cfg.mode != TrainMode::Standard {
        return Err(Error::Config("train_standard needs mode = standard".into()));
    }
    cfg.check_data(data)?;
    let start = Instant::now();
    let init = initial_dictionary(data, cfg.atoms, &cfg.init)?;
    let run = alternate(data, init, cfg.sparsity, cfg.iterations, cfg.seed)?;
    let wall_time_s = seconds(start);
    let final_mse_db = metrics::mse_db_dense(data.matrix(), run.dictionary.matrix(), &run.codes)?;
    Ok(Trained {
        report: TrainReport {
            mode: "standard".into(),
            final_mse_db,
            coding_residuals: run.coding_residuals,
            update_residuals: run.update_residuals,
            replaced_atoms: run.replaced,
            wall_time_s,
            ..TrainReport::default()
        },
        dictionary: run.dictionary,
        codes: run.codes,
    })
}

/// Column indices of each shard after a seeded shuffle.
///
/// Shards get `⌊N/L⌋` columns and the first `N mod L` shards one extra.
pub fn split_indices(n: usize, shards: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if shards == 0 || shards > n {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} columns into {shards} shards"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, Purpose::Split, 0));
    let (base, extra) = (n / shards, n % shards);
    let mut out = Vec::with_capacity(shards);
    let mut start = 0;
    for t in 0..shards {
        let len = base + usize::from(t < extra);
        out.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

/// Splits `data` into `shards` disjoint random subsets.
pub fn split_dataset(data: &TrainingSet, shards: usize, seed: u64) -> Result<Vec<TrainingSet>> {
    Ok(split_indices(data.len(), shards, seed)?
        .iter()
        .map(|idx| data.select(idx))
        .collect())
}

/// Trains one local dictionary; returns it with the shard's final codes.
pub fn train_local(
    shard: &TrainingSet,
    atoms: usize,
    sparsity: usize,
    iterations: usize,
    init: &InitStrategy,
    seed: u64,
) -> Result<(Dictionary, SparseCodeMatrix)> {
    let cfg = TrainConfig::standard(atoms, sparsity, iterations)
        .with_init(init.clone())
        .with_seed(seed);
    let trained = train_standard(shard, &cfg)?;
    Ok((trained.dictionary, trained.codes))
}

/// Stacks `‖X⁽ᵗ⁾‖_F · D⁽ᵗ⁾` for every local pair. Locals whose codes are all
/// zero carry no weight and are dropped.
pub fn merge_training_set(locals: &[(Dictionary, SparseCodeMatrix)]) -> Result<TrainingSet> {
    let Some((first, _)) = locals.first() else {
        return Err(Error::InvalidInput("no local dictionaries to merge".into()));
    };
    let m = first.dim();
    let mut blocks = Vec::new();
    for (t, (d, x)) in locals.iter().enumerate() {
        if d.dim() != m {
            return Err(Error::Dimension(format!(
                "local dictionary {t} has dimension {}, expected {m}",
                d.dim()
            )));
        }
        if x.rows() != d.len() {
            return Err(Error::Dimension(format!(
                "local codes {t} have {} rows for {} atoms",
                x.rows(),
                d.len()
            )));
        }
        let weight = x.frobenius_norm();
        if weight > 0.0 {
            blocks.push(d.matrix() * weight);
        }
    }
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut stacked = DMatrix::zeros(m, total);
    let mut col = 0;
    for b in blocks {
        stacked.columns_mut(col, b.ncols()).copy_from(&b);
        col += b.ncols();
    }
    Ok(TrainingSet::new(stacked))
}

/// Learns the global dictionary from the scaled local atoms.
pub fn merge_dictionaries(
    locals: &[(Dictionary, SparseCodeMatrix)],
    atoms: usize,
    sparsity: usize,
    iterations: usize,
    init: &InitStrategy,
    seed: u64,
) -> Result<Trained> {
    let merged = merge_training_set(locals)?;
    let cfg = TrainConfig::standard(atoms, sparsity, iterations)
        .with_init(init.clone())
        .with_seed(seed);
    train_standard(&merged, &cfg)
}

/// Split, train locals in parallel, merge. The returned codes are the full
/// training set coded over the merged dictionary at sparsity `s`.
pub fn train_split_merge(data: &TrainingSet, cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    let TrainMode::SplitMerge(params) = &cfg.mode else {
        return Err(Error::Config("train_split_merge needs mode = split-merge".into()));
    };
    cfg.check_data(data)?;
    let local_iterations = params.local_iterations.unwrap_or(cfg.iterations);
    let merge_iterations = params.merge_iterations.unwrap_or(cfg.iterations);

    let start = Instant::now();
    let shards = split_dataset(data, params.shards, cfg.seed)?;
    let split_time_s = seconds(start);

    let locals: Vec<(Dictionary, SparseCodeMatrix, f64, f64)> = shards
        .par_iter()
        .enumerate()
        .map(|(t, shard)| {
            let t0 = Instant::now();
            let seed = rng::derive_seed(cfg.seed, Purpose::LocalTraining, t as u64);
            let (d, x) = train_local(
                shard,
                params.local_atoms,
                params.local_sparsity,
                local_iterations,
                &cfg.init,
                seed,
            )?;
            let mse = metrics::mse_db_dense(shard.matrix(), d.matrix(), &x)?;
            Ok((d, x, seconds(t0), mse))
        })
        .collect::<Result<_>>()?;
    drop(shards);

    let (pairs, (local_wall_times_s, local_mse_db)): (Vec<_>, (Vec<_>, Vec<_>)) = locals
        .into_iter()
        .map(|(d, x, time, mse)| ((d, x), (time, mse)))
        .unzip();

    let merge_start = Instant::now();
    let merge_seed = rng::derive_seed(cfg.seed, Purpose::MergeTraining, 0);
    let merged = merge_dictionaries(
        &pairs,
        cfg.atoms,
        params.merge_sparsity,
        merge_iterations,
        &cfg.init,
        merge_seed,
    )?;
    let merge_wall_time_s = seconds(merge_start);
    let wall_time_s = seconds(start);

    let eval_start = Instant::now();
    let codes = SparseCoder::new(&merged.dictionary)
        .code_batch(data, CodingMode::FixedSparsity(cfg.sparsity))?
        .codes;
    let final_mse_db = metrics::mse_db_dense(data.matrix(), merged.dictionary.matrix(), &codes)?;
    let evaluation_time_s = seconds(eval_start);

    Ok(Trained {
        report: TrainReport {
            mode: "split-merge".into(),
            final_mse_db,
            coding_residuals: merged.report.coding_residuals,
            update_residuals: merged.report.update_residuals,
            replaced_atoms: merged.report.replaced_atoms,
            wall_time_s,
            split_time_s,
            local_wall_times_s,
            local_mse_db,
            merge_wall_time_s,
            evaluation_time_s,
        },
        dictionary: merged.dictionary,
        codes,
    })
}

/// Dispatches on `cfg.mode`.
pub fn train(data: &TrainingSet, cfg: &TrainConfig) -> Result<Trained> {
    match cfg.mode {
        TrainMode::Standard => train_standard(data, cfg),
        TrainMode::SplitMerge(_) => train_split_merge(data, cfg),
    }
}
