//! Train a 64×256 patch dictionary on a small grayscale corpus, both ways, and
//! denoise a held-out image at several noise levels.
//!
//! ```text
//! cargo run --release --example image_denoising -- [iterations] [patches]
//! ```
//!
//! Images are read from `data/images`; `lena.pgm` is held out for testing.

use std::path::PathBuf;

use sparsedict::denoise::{add_gaussian_noise, denoise_image, load_pgm, sample_training_patches, DenoiseConfig};
use sparsedict::metrics::psnr;
use sparsedict::{train_split_merge, train_standard, InitStrategy, SplitMergeParams, TrainConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(100);
    let count: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(100_000);

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/images");
    let mut corpus = Vec::new();
    for name in ["ascent", "astronaut", "camera", "chelsea", "coffee", "face"] {
        corpus.push(load_pgm(dir.join(format!("{name}.pgm")))?);
    }
    let test = load_pgm(dir.join("lena.pgm"))?;
    let patches = sample_training_patches(&corpus, 8, count, 0)?;

    let standard = train_standard(
        &patches,
        &TrainConfig::standard(256, 10, iterations).with_init(InitStrategy::OvercompleteDct),
    )?;
    println!("standard     trained in {:7.2} s, mse {:6.2} dB", standard.report.wall_time_s, standard.report.final_mse_db);

    let params = SplitMergeParams {
        shards: 20,
        local_atoms: 128,
        local_sparsity: 5,
        merge_sparsity: 2,
        local_iterations: None,
        merge_iterations: None,
    };
    let split = train_split_merge(
        &patches,
        &TrainConfig::split_merge(256, 10, iterations, params).with_init(InitStrategy::OvercompleteDct),
    )?;
    println!("split-merge  trained in {:7.2} s, mse {:6.2} dB", split.report.wall_time_s, split.report.final_mse_db);

    println!("sigma  input   standard  split-merge");
    for sigma in [10.0, 15.0, 20.0, 25.0, 50.0] {
        let noisy = add_gaussian_noise(&test, sigma, 1)?;
        let cfg = DenoiseConfig::new(sigma);
        let a = denoise_image(&noisy, &standard.dictionary, &cfg)?;
        let b = denoise_image(&noisy, &split.dictionary, &cfg)?;
        println!(
            "{sigma:5.0}  {:6.2}  {:8.2}  {:11.2}",
            psnr(&test, &noisy)?,
            psnr(&test, &a)?,
            psnr(&test, &b)?
        );
    }
    Ok(())
}
