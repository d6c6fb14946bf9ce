//! Sparse dictionary learning.
//!
//! The crate learns overcomplete dictionaries for sparse representation in two
//! ways:
//!
//! * the conventional alternating loop over the whole data matrix: orthogonal
//!   matching pursuit ([`omp`]) for the codes, then the method of optimal
//!   directions ([`update`]) for the dictionary;
//! * split-and-merge training ([`trainer::train_split_merge`]): the data is
//!   split into disjoint shards, a small local dictionary is trained on each
//!   shard in parallel, and the local atoms (scaled by the Frobenius norm of
//!   their local codes) become the training set for one final, global
//!   dictionary.
//!
//! Around the trainers sit the synthetic atom-recovery experiment
//! ([`synthesis`]), evaluation metrics and the analytic cost model
//! ([`metrics`], [`cost`], [`bench`]), patch-based image denoising
//! ([`denoise`]) and the binary file formats ([`io`]).
//!
//! Parallel sections run on the ambient rayon pool. Every result is
//! independent of the number of worker threads.

pub mod bench;
pub mod cli;
pub mod cost;
pub mod denoise;
pub mod dictionary;
pub mod error;
pub mod io;
pub mod metrics;
pub mod omp;
pub mod rng;
pub mod sparse;
pub mod synthesis;
pub mod trainer;
pub mod update;

pub use dictionary::{Dictionary, TrainingSet};
pub use error::{Error, Result};
pub use omp::{omp_batch, omp_error_bound, omp_fixed_sparsity, CodingMode, SparseCoder};
pub use sparse::{SparseCodeMatrix, SparseVector};
pub use trainer::{
    train_split_merge, train_standard, InitStrategy, SplitMergeParams, TrainConfig, TrainMode,
    TrainReport,
};
