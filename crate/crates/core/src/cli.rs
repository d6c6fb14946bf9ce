//! The `sparsedict` command line.
//!
//! Every command validates its inputs before doing any real work and writes a
//! `manifest.json` next to its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{bench_sweep, write_sweep_csv, BenchConfig};
use crate::denoise::{self, DenoiseConfig};
use crate::io::{self, RunManifest};
use crate::metrics::{self, RECOVERY_THRESHOLD};
use crate::omp::{omp_batch, CodingMode};
use crate::synthesis::SyntheticSpec;
use crate::trainer::{self, TrainConfig};

pub const THREADS_ENV: &str = "SPARSEDICT_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "sparsedict", version, about = "Sparse dictionary learning with split-and-merge training")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON configuration file for the command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed; overrides the configuration's seed. Defaults to 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dictionary, signals and codes.
    Gen,
    /// Train a dictionary on an SDATA file.
    Train {
        /// Training set (SDATA).
        #[arg(long)]
        data: PathBuf,
    },
    /// Denoise a PGM image with a trained dictionary.
    Denoise {
        /// Noisy input image (PGM), or the clean image with `--add-noise`.
        #[arg(long)]
        input: PathBuf,
        /// Dictionary (SDICT) with `patch²` rows.
        #[arg(long)]
        dict: PathBuf,
        /// Noise standard deviation in gray levels.
        #[arg(long)]
        sigma: f64,
        /// Clean reference for PSNR reporting.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        patch: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 8.5)]
        eps_gain: f64,
        /// Treat the input as clean: add seeded noise first and use the input
        /// as the reference.
        #[arg(long)]
        add_noise: bool,
    },
    /// Report atom recovery against a true dictionary and/or training MSE.
    Eval {
        #[arg(long)]
        dict: PathBuf,
        /// True dictionary (SDICT).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Training set (SDATA) for the MSE, coded at `--sparsity`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        sparsity: Option<usize>,
    },
    /// Time both trainers over a sweep of shard counts.
    Bench,
}

/// Runs a parsed command line on a pool of the requested size.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building the thread pool")?;
    pool.install(|| dispatch(&cli.global, &cli.command))
}

fn dispatch(g: &GlobalArgs, cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::Gen => cmd_gen(g),
        Command::Train { data } => cmd_train(g, data),
        Command::Denoise {
            input,
            dict,
            sigma,
            reference,
            patch,
            stride,
            eps_gain,
            add_noise,
        } => {
            let cfg = DenoiseConfig {
                patch_size: *patch,
                stride: *stride,
                sigma: *sigma,
                eps_gain: *eps_gain,
                max_atoms: None,
            };
            cmd_denoise(g, input, dict, reference.as_deref(), cfg, *add_noise)
        }
        Command::Eval {
            dict,
            truth,
            data,
            sparsity,
        } => cmd_eval(g, dict, truth.as_deref(), data.as_deref(), *sparsity),
        Command::Bench => cmd_bench(g),
    }
}

fn out_dir(g: &GlobalArgs) -> anyhow::Result<&Path> {
    let dir = g.out.as_deref().context("--out <dir> is required")?;
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn manifest(g: &GlobalArgs, command: &str, seed: u64) -> RunManifest {
    let mut m = RunManifest::new(command, seed);
    m.config_path = g.config.clone();
    m
}

fn finish(dir: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    io::write_json(dir.join(MANIFEST_FILE), manifest)?;
    Ok(())
}

fn cmd_gen(g: &GlobalArgs) -> anyhow::Result<()> {
    let mut spec = match &g.config {
        Some(path) => io::read_json::<SyntheticSpec>(path)?,
        None => SyntheticSpec::reference(0),
    };
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let dir = out_dir(g)?;

    let (dict, data, codes) = spec.generate()?;
    let outputs = [
        dir.join("truth.sdict"),
        dir.join("train.sdata"),
        dir.join("truth.scode"),
        dir.join("spec.json"),
    ];
    io::write_dictionary(&outputs[0], &dict)?;
    io::write_training_set(&outputs[1], &data)?;
    io::write_codes(&outputs[2], &codes)?;
    io::write_json(&outputs[3], &spec)?;

    let mut m = manifest(g, "gen", spec.seed);
    m.outputs = outputs.to_vec();
    finish(dir, &m)?;
    println!(
        "wrote {}x{} dictionary and {} signals to {}",
        spec.dim,
        spec.atoms,
        spec.signals,
        dir.display()
    );
    Ok(())
}

fn cmd_train(g: &GlobalArgs, data_path: &Path) -> anyhow::Result<()> {
    let config = g.config.as_deref().context("train needs --config <json>")?;
    let mut cfg: TrainConfig = io::read_json(config)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let data = io::read_training_set(data_path)?;
    let dir = out_dir(g)?;

    let trained = trainer::train(&data, &cfg)?;
    let outputs = [dir.join("dictionary.sdict"), dir.join("codes.scode"), dir.join("report.json")];
    io::write_dictionary(&outputs[0], &trained.dictionary)?;
    io::write_codes(&outputs[1], &trained.codes)?;
    io::write_json(&outputs[2], &trained.report)?;

    let mut m = manifest(g, "train", cfg.seed);
    m.inputs = vec![data_path.to_path_buf()];
    m.outputs = outputs.to_vec();
    finish(dir, &m)?;
    println!(
        "{} training: {:.2} s, training MSE {:.2} dB",
        trained.report.mode, trained.report.wall_time_s, trained.report.final_mse_db
    );
    Ok(())
}

fn cmd_denoise(
    g: &GlobalArgs,
    input: &Path,
    dict_path: &Path,
    reference: Option<&Path>,
    cfg: DenoiseConfig,
    add_noise: bool,
) -> anyhow::Result<()> {
    cfg.validate()?;
    let dict = io::read_dictionary(dict_path)?;
    if dict.dim() != cfg.patch_size * cfg.patch_size {
        bail!(
            "dictionary {} has {} rows, {}x{} patches need {}",
            dict_path.display(),
            dict.dim(),
            cfg.patch_size,
            cfg.patch_size,
            cfg.patch_size * cfg.patch_size
        );
    }
    let loaded = denoise::load_pgm(input)?;
    let reference = match (reference, add_noise) {
        (Some(path), _) => Some(denoise::load_pgm(path)?),
        (None, true) => Some(loaded.clone()),
        (None, false) => None,
    };
    let seed = g.seed.unwrap_or(0);
    let noisy = if add_noise {
        denoise::add_gaussian_noise(&loaded, cfg.sigma, seed)?
    } else {
        loaded
    };
    let dir = out_dir(g)?;

    let clean = denoise::denoise_image(&noisy, &dict, &cfg)?;
    let output = dir.join("denoised.pgm");
    denoise::save_pgm(&clean, &output)?;

    if let Some(r) = &reference {
        println!("input PSNR: {:.2} dB", metrics::psnr(r, &noisy)?);
        println!("output PSNR: {:.2} dB", metrics::psnr(r, &clean)?);
    }
    let mut m = manifest(g, "denoise", seed);
    m.inputs = vec![input.to_path_buf(), dict_path.to_path_buf()];
    m.outputs = vec![output];
    finish(dir, &m)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    atom_recovery_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse_db: Option<f64>,
}

fn cmd_eval(
    g: &GlobalArgs,
    dict_path: &Path,
    truth: Option<&Path>,
    data: Option<&Path>,
    sparsity: Option<usize>,
) -> anyhow::Result<()> {
    if truth.is_none() && data.is_none() {
        bail!("eval needs --truth <sdict> and/or --data <sdata>");
    }
    if data.is_some() && sparsity.is_none() {
        bail!("--data needs --sparsity <s>");
    }
    let dict = io::read_dictionary(dict_path)?;
    let atom_recovery_pct = truth
        .map(|p| -> anyhow::Result<f64> {
            let t = io::read_dictionary(p)?;
            Ok(metrics::atom_recovery(&t, &dict, RECOVERY_THRESHOLD)?)
        })
        .transpose()?;
    let mse_db = data
        .map(|p| -> anyhow::Result<f64> {
            let y = io::read_training_set(p)?;
            let s = sparsity.expect("checked above");
            let x = omp_batch(&y, &dict, CodingMode::FixedSparsity(s))?;
            Ok(metrics::mse_db(&y, &dict, &x)?)
        })
        .transpose()?;

    let report = EvalReport {
        atom_recovery_pct,
        mse_db,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if g.out.is_some() {
        let dir = out_dir(g)?;
        let path = dir.join("eval.json");
        io::write_json(&path, &report)?;
        let mut m = manifest(g, "eval", g.seed.unwrap_or(0));
        m.inputs = [Some(dict_path), truth, data].into_iter().flatten().map(Path::to_path_buf).collect();
        m.outputs = vec![path];
        finish(dir, &m)?;
    }
    Ok(())
}

fn cmd_bench(g: &GlobalArgs) -> anyhow::Result<()> {
    let config = g.config.as_deref().context("bench needs --config <json>")?;
    let mut cfg: BenchConfig = io::read_json(config)?;
    if let Some(seed) = g.seed {
        cfg.data.seed = seed;
        cfg.standard.seed = seed;
        cfg.split_merge.seed = seed;
    }
    cfg.validate()?;
    let dir = out_dir(g)?;

    let (truth, data, _) = cfg.data.generate()?;
    let reports = bench_sweep(&data, &cfg.standard, &cfg.split_merge, &cfg.shards, Some(&truth))?;
    let outputs = [dir.join("bench.json"), dir.join("sweep.csv")];
    io::write_json(&outputs[0], &reports)?;
    write_sweep_csv(&outputs[1], &reports)?;

    let mut m = manifest(g, "bench", cfg.data.seed);
    m.outputs = outputs.to_vec();
    finish(dir, &m)?;
    println!("shards  speedup  predicted ratio");
    for r in &reports {
        println!(
            "{:6}  {:7.2}  {:15.4}",
            r.params.split.shards, r.speedup, r.predicted_ratio
        );
    }
    Ok(())
}
