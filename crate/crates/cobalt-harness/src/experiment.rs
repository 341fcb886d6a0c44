//! Multi-trial experiment execution and artifact emission.
//!
//! An experiment writes `manifest.json` (config echo plus task metadata),
//! one `regret_<trial>.csv` per trial, and `summary.json` (per-iteration
//! mean/median regret with a 95% confidence interval across trials). Trials
//! are deterministic per seed and write to separate files, so parallel and
//! serial execution produce byte-identical artifacts. Floats are serialized
//! with 17 significant digits; infeasible rewards and infinite regrets
//! appear as the string `inf_regret`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use cobalt::optimizer::{run_coupled, run_decoupled, TrialRecord};
use cobalt::tasks::{by_name, Regret, TaskDefinition};

use crate::baselines::{run_cei, run_random};
use crate::config::{csv_columns, AlgorithmKind, ExperimentConfig, Manifest, TaskMetadata};

/// Outcome of one experiment: records in trial order plus artifact paths.
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub dir: PathBuf,
    pub csv_paths: Vec<PathBuf>,
}

fn run_one(
    task: &TaskDefinition,
    config: &ExperimentConfig,
    trial: usize,
) -> cobalt::Result<TrialRecord> {
    let opt = config.optimizer_config(trial);
    match config.algorithm {
        AlgorithmKind::CobaltCoupled => run_coupled(task, &opt),
        AlgorithmKind::CobaltDecoupled => run_decoupled(task, &opt),
        AlgorithmKind::Cei => run_cei(task, &opt),
        AlgorithmKind::Random => run_random(task, &opt),
    }
}

/// Run all trials (parallel over seeds) and write the run directory.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<ExperimentOutput> {
    config.validate()?;
    let task = by_name(&config.task)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        task: TaskMetadata::from_task(&task),
        csv_columns: csv_columns(task.num_constraints()),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    fs::write(out_dir.join("manifest.json"), &manifest_json)?;

    let run_trials = |cfg: &ExperimentConfig| -> cobalt::Result<Vec<TrialRecord>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_one(&task, cfg, i))
            .collect()
    };
    let records = if config.parallelism > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .context("building worker pool")?;
        pool.install(|| run_trials(config))?
    } else {
        run_trials(config)?
    };

    let mut csv_paths = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let path = out_dir.join(format!("regret_{i:03}.csv"));
        fs::write(&path, render_csv(record, task.num_constraints()))?;
        csv_paths.push(path);
    }

    let summary = build_summary(config, &records);
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;

    Ok(ExperimentOutput {
        records,
        dir: out_dir.to_path_buf(),
        csv_paths,
    })
}

/// Render one trial as CSV with the fixed column schema.
pub fn render_csv(record: &TrialRecord, num_constraints: usize) -> String {
    let mut out = String::new();
    out.push_str(&csv_columns(num_constraints).join(","));
    out.push('\n');
    for row in &record.rows {
        let mut fields: Vec<String> = vec![
            row.t.to_string(),
            row.chosen.to_string(),
            row.aspect.to_string(),
            row.reward.to_csv_field(),
            row.best_reward.to_csv_field(),
            row.simple_regret.to_csv_field(),
            format!("{:.16e}", row.alpha),
            row.roi_size.to_string(),
        ];
        for k in 0..num_constraints {
            fields.push(row.u_sizes.get(k).copied().unwrap_or(0).to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Per-iteration aggregate over trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub t: usize,
    /// Mean over trials, or `"inf_regret"` when any trial is still infinite.
    pub mean_regret: serde_json::Value,
    pub ci95_lo: Option<f64>,
    pub ci95_hi: Option<f64>,
    /// Median over trials (infinite regret sorts above every value).
    pub median_regret: serde_json::Value,
    /// Mean regret min-max normalized over the experiment's finite values.
    pub mean_regret_normalized: serde_json::Value,
    pub feasible_trials: usize,
}

fn regret_json(r: Regret) -> serde_json::Value {
    match r {
        Regret::Value(v) => json!(v),
        Regret::Infinite => json!("inf_regret"),
    }
}

fn median_regret(mut values: Vec<Regret>) -> Regret {
    values.sort_by(|a, b| match (a, b) {
        (Regret::Infinite, Regret::Infinite) => std::cmp::Ordering::Equal,
        (Regret::Infinite, _) => std::cmp::Ordering::Greater,
        (_, Regret::Infinite) => std::cmp::Ordering::Less,
        (Regret::Value(x), Regret::Value(y)) => x.total_cmp(y),
    });
    values[(values.len() - 1) / 2]
}

/// Aggregate the records into the summary document.
pub fn build_summary(config: &ExperimentConfig, records: &[TrialRecord]) -> serde_json::Value {
    let budget = config.budget;
    // normalization over every finite regret value in the experiment
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for record in records {
        for row in &record.rows {
            if let Regret::Value(v) = row.simple_regret {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let norm = |v: f64| -> f64 {
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    };

    let mut per_iteration = Vec::with_capacity(budget);
    for t in 1..=budget {
        let regrets: Vec<Regret> = records
            .iter()
            .map(|r| r.rows.get(t - 1).map_or(Regret::Infinite, |row| row.simple_regret))
            .collect();
        let finite: Vec<f64> = regrets.iter().filter_map(|r| r.value()).collect();
        let all_finite = finite.len() == regrets.len();
        let (mean, ci_lo, ci_hi, mean_norm) = if all_finite {
            let n = finite.len() as f64;
            let mean = finite.iter().sum::<f64>() / n;
            let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / if finite.len() > 1 { n - 1.0 } else { 1.0 };
            let half = 1.96 * (var / n).sqrt();
            (
                json!(mean),
                Some(mean - half),
                Some(mean + half),
                json!(norm(mean)),
            )
        } else {
            (json!("inf_regret"), None, None, json!("inf_regret"))
        };
        per_iteration.push(SummaryRow {
            t,
            mean_regret: mean,
            ci95_lo: ci_lo,
            ci95_hi: ci_hi,
            median_regret: regret_json(median_regret(regrets)),
            mean_regret_normalized: mean_norm,
            feasible_trials: finite.len(),
        });
    }

    let finals: Vec<Regret> = records.iter().map(TrialRecord::final_regret).collect();
    let zeros = finals
        .iter()
        .filter(|r| matches!(r, Regret::Value(v) if *v == 0.0))
        .count();
    json!({
        "task": config.task,
        "algorithm": config.algorithm.to_string(),
        "trials": config.trials,
        "budget": config.budget,
        "per_iteration": per_iteration,
        "final": {
            "median_regret": regret_json(median_regret(finals.clone())),
            "regrets": finals.iter().map(|r| regret_json(*r)).collect::<Vec<_>>(),
            "trials_at_zero": zeros,
            "aspect_counts": records.iter().map(|r| r.aspect_counts.clone()).collect::<Vec<_>>(),
            "bound_crossings": records.iter().map(|r| r.bound_crossings).sum::<u64>(),
            "empty_roi_fallbacks": records.iter().map(|r| r.empty_roi_fallbacks).sum::<u64>(),
        },
    })
}

/// Re-derive the regret column from the reward column of a rendered CSV;
/// used by tests and the validation suite to cross-check emitted artifacts.
pub fn check_csv_consistency(csv: &str, optimal_reward: f64) -> anyhow::Result<()> {
    let mut best: Option<f64> = None;
    for (lineno, line) in csv.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(fields.len() >= 8, "row {lineno}: too few columns");
        let reward = fields[3];
        let regret = fields[5];
        if reward != "inf_regret" {
            let r: f64 = reward.parse()?;
            best = Some(best.map_or(r, |b: f64| b.max(r)));
        }
        match best {
            None => anyhow::ensure!(
                regret == "inf_regret",
                "row {lineno}: regret should be sentinel"
            ),
            Some(b) => {
                let expect = optimal_reward - b;
                let got: f64 = regret
                    .parse()
                    .with_context(|| format!("row {lineno}: regret not numeric"))?;
                anyhow::ensure!(
                    (got - expect).abs() < 1e-9,
                    "row {lineno}: regret {got} != {expect}"
                );
            }
        }
    }
    Ok(())
}

/// Write a moderately pretty textual report of a summary to a writer.
pub fn print_summary(summary: &serde_json::Value, mut w: impl std::io::Write) -> std::io::Result<()> {
    let fin = &summary["final"];
    writeln!(
        w,
        "task={} algorithm={} trials={} budget={}",
        summary["task"], summary["algorithm"], summary["trials"], summary["budget"]
    )?;
    writeln!(
        w,
        "final median regret: {}  trials at zero: {}",
        fin["median_regret"], fin["trials_at_zero"]
    )?;
    writeln!(
        w,
        "bound crossings: {}  empty-ROI fallbacks: {}",
        fin["bound_crossings"], fin["empty_roi_fallbacks"]
    )?;
    Ok(())
}
