//! Wall-clock comparison of the two trainers against the analytic cost model.
//!
//! Trainers run one after the other, never concurrently, so their timings do
//! not compete for cores.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{predict_costs, CostParams};
use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::metrics::{atom_recovery, RECOVERY_THRESHOLD};
use crate::synthesis::SyntheticSpec;
use crate::trainer::{train_split_merge, train_standard, SplitMergeParams, TrainConfig, TrainMode, TrainReport};

/// Wall times of one trainer, by phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub split_s: f64,
    /// Sum over shards of the local training times.
    pub local_sum_s: f64,
    /// Slowest shard, what a fully parallel run would wait for.
    pub local_max_s: f64,
    pub merge_s: f64,
    /// Split, locals and merge (or the whole standard run).
    pub total_s: f64,
    pub evaluation_s: f64,
}

impl PhaseTimes {
    fn from_report(r: &TrainReport) -> Self {
        Self {
            split_s: r.split_time_s,
            local_sum_s: r.local_wall_times_s.iter().sum(),
            local_max_s: r.local_wall_times_s.iter().copied().fold(0.0, f64::max),
            merge_s: r.merge_wall_time_s,
            total_s: r.wall_time_s,
            evaluation_s: r.evaluation_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerResult {
    pub wall_time_s: PhaseTimes,
    pub mse_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_recovery_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchParams {
    pub signals: usize,
    pub dim: usize,
    pub atoms: usize,
    pub sparsity: usize,
    pub iterations: usize,
    pub seed: u64,
    pub threads: usize,
    pub split: SplitMergeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: BenchParams,
    pub standard: TrainerResult,
    pub split_merge: TrainerResult,
    /// Standard total time over split-merge total time.
    pub speedup: f64,
    /// Model prediction of split-merge cost over standard cost.
    pub predicted_ratio: f64,
    pub same_order: bool,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bench report: {e}")))
    }
}

fn split_params(cfg: &TrainConfig) -> Result<&SplitMergeParams> {
    match &cfg.mode {
        TrainMode::SplitMerge(p) => Ok(p),
        TrainMode::Standard => Err(Error::Config("split config must use mode = split-merge".into())),
    }
}

fn check_pair(standard: &TrainConfig, split: &TrainConfig) -> Result<()> {
    standard.validate()?;
    split.validate()?;
    if standard.mode != TrainMode::Standard {
        return Err(Error::Config("standard config must use mode = standard".into()));
    }
    split_params(split)?;
    if standard.atoms != split.atoms || standard.sparsity != split.sparsity {
        return Err(Error::Config(format!(
            "configs target different (K, s): ({}, {}) vs ({}, {})",
            standard.atoms, standard.sparsity, split.atoms, split.sparsity
        )));
    }
    Ok(())
}

pub fn cost_params(data: &TrainingSet, split: &TrainConfig) -> Result<CostParams> {
    let p = split_params(split)?;
    Ok(CostParams {
        signals: data.len() as u64,
        dim: data.dim() as u64,
        atoms: split.atoms as u64,
        sparsity: split.sparsity as u64,
        shards: p.shards as u64,
        local_atoms: p.local_atoms as u64,
        local_sparsity: p.local_sparsity as u64,
        merge_sparsity: p.merge_sparsity as u64,
    })
}

fn result(report: &TrainReport, dict: &Dictionary, truth: Option<&Dictionary>) -> Result<TrainerResult> {
    Ok(TrainerResult {
        wall_time_s: PhaseTimes::from_report(report),
        mse_db: report.final_mse_db,
        atom_recovery_pct: truth
            .map(|t| atom_recovery(t, dict, RECOVERY_THRESHOLD))
            .transpose()?,
    })
}

fn split_result(data: &TrainingSet, split: &TrainConfig, truth: Option<&Dictionary>) -> Result<TrainerResult> {
    let run = train_split_merge(data, split)?;
    result(&run.report, &run.dictionary, truth)
}

fn assemble(
    data: &TrainingSet,
    standard_cfg: &TrainConfig,
    split_cfg: &TrainConfig,
    standard: TrainerResult,
    split_merge: TrainerResult,
) -> Result<BenchReport> {
    let prediction = predict_costs(&cost_params(data, split_cfg)?)?;
    Ok(BenchReport {
        params: BenchParams {
            signals: data.len(),
            dim: data.dim(),
            atoms: standard_cfg.atoms,
            sparsity: standard_cfg.sparsity,
            iterations: standard_cfg.iterations,
            seed: split_cfg.seed,
            threads: rayon::current_num_threads(),
            split: split_params(split_cfg)?.clone(),
        },
        speedup: standard.wall_time_s.total_s / split_merge.wall_time_s.total_s,
        standard,
        split_merge,
        predicted_ratio: prediction.ratio,
        same_order: prediction.same_order,
    })
}

/// Trains both ways on `data` and compares.
pub fn bench_compare(
    data: &TrainingSet,
    standard_cfg: &TrainConfig,
    split_cfg: &TrainConfig,
    truth: Option<&Dictionary>,
) -> Result<BenchReport> {
    check_pair(standard_cfg, split_cfg)?;
    let std_run = train_standard(data, standard_cfg)?;
    let standard = result(&std_run.report, &std_run.dictionary, truth)?;
    drop(std_run);
    let split_merge = split_result(data, split_cfg, truth)?;
    assemble(data, standard_cfg, split_cfg, standard, split_merge)
}

/// `split` with its shard count replaced by each entry of `shards`, all checked
/// against `standard`. The shard count in `split` itself is ignored.
pub fn sweep_configs(standard: &TrainConfig, split: &TrainConfig, shards: &[usize]) -> Result<Vec<TrainConfig>> {
    if shards.is_empty() {
        return Err(Error::Config("shard sweep is empty".into()));
    }
    split_params(split)?;
    shards
        .iter()
        .map(|&l| {
            let mut cfg = split.clone();
            if let TrainMode::SplitMerge(p) = &mut cfg.mode {
                p.shards = l;
            }
            check_pair(standard, &cfg)?;
            Ok(cfg)
        })
        .collect()
}

/// One split-merge run per shard count, all against a single standard run.
pub fn bench_sweep(
    data: &TrainingSet,
    standard_cfg: &TrainConfig,
    split_cfg: &TrainConfig,
    shards: &[usize],
    truth: Option<&Dictionary>,
) -> Result<Vec<BenchReport>> {
    let configs = sweep_configs(standard_cfg, split_cfg, shards)?;
    if let Some(&l) = shards.iter().find(|&&l| l > data.len()) {
        return Err(Error::Config(format!("{l} shards for {} signals", data.len())));
    }
    let std_run = train_standard(data, standard_cfg)?;
    let standard = result(&std_run.report, &std_run.dictionary, truth)?;
    drop(std_run);
    configs
        .iter()
        .map(|cfg| {
            let split = split_result(data, cfg, truth)?;
            assemble(data, standard_cfg, cfg, standard.clone(), split)
        })
        .collect()
}

/// One CSV row per report, for plotting time against `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub shards: usize,
    pub standard_time_s: f64,
    pub split_merge_time_s: f64,
    pub measured_speedup: f64,
    pub measured_ratio: f64,
    pub predicted_ratio: f64,
    pub same_order: bool,
    pub standard_mse_db: f64,
    pub split_merge_mse_db: f64,
    pub standard_recovery_pct: Option<f64>,
    pub split_merge_recovery_pct: Option<f64>,
}

impl From<&BenchReport> for SweepRow {
    fn from(r: &BenchReport) -> Self {
        let (t_std, t_split) = (r.standard.wall_time_s.total_s, r.split_merge.wall_time_s.total_s);
        Self {
            shards: r.params.split.shards,
            standard_time_s: t_std,
            split_merge_time_s: t_split,
            measured_speedup: t_std / t_split,
            measured_ratio: t_split / t_std,
            predicted_ratio: r.predicted_ratio,
            same_order: r.same_order,
            standard_mse_db: r.standard.mse_db,
            split_merge_mse_db: r.split_merge.mse_db,
            standard_recovery_pct: r.standard.atom_recovery_pct,
            split_merge_recovery_pct: r.split_merge.atom_recovery_pct,
        }
    }
}

pub fn write_sweep_csv(path: impl AsRef<Path>, reports: &[BenchReport]) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in reports {
        w.serialize(SweepRow::from(r)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::format(path, e.to_string());
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Input of the `bench` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Synthetic data with a known dictionary.
    pub data: SyntheticSpec,
    pub standard: TrainConfig,
    pub split_merge: TrainConfig,
    /// Shard counts to sweep.
    pub shards: Vec<usize>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        sweep_configs(&self.standard, &self.split_merge, &self.shards)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{gen_dictionary, gen_signals};

    fn small() -> (Dictionary, TrainingSet, TrainConfig, TrainConfig) {
        let d = gen_dictionary(6, 8, 3).unwrap();
        let (y, _) = gen_signals(&d, 200, 2, 3).unwrap();
        let std_cfg = TrainConfig::standard(8, 2, 3);
        let split = TrainConfig::split_merge(
            8,
            2,
            3,
            SplitMergeParams {
                shards: 4,
                local_atoms: 6,
                local_sparsity: 2,
                merge_sparsity: 1,
                local_iterations: None,
                merge_iterations: None,
            },
        );
        (d, y, std_cfg, split)
    }

    #[test]
    fn report_round_trips() {
        let (d, y, a, b) = small();
        let report = bench_compare(&y, &a, &b, Some(&d)).unwrap();
        let back = BenchReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        assert!(report.standard.atom_recovery_pct.is_some());
    }

    #[test]
    fn rejects_mismatched_targets_and_empty_sweep() {
        let (_, y, a, b) = small();
        let mut other = a.clone();
        other.atoms = 7;
        assert!(bench_compare(&y, &other, &b, None).is_err());
        assert!(bench_sweep(&y, &a, &b, &[], None).is_err());
    }

    #[test]
    fn sweep_csv_round_trips() {
        let (_, y, a, b) = small();
        let reports = bench_sweep(&y, &a, &b, &[2, 4], None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &reports).unwrap();
        let rows = read_sweep_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].shards, 4);
        assert_eq!(rows[0], SweepRow::from(&reports[0]));
    }
}
