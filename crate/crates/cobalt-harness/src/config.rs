//! Experiment configuration and the run manifest.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cobalt::acquisition::ObjectiveAcqForm;
use cobalt::bounds::{BetaMode, PiRule};
use cobalt::optimizer::{EvalMode, ObjectiveDomain, OptimizerConfig};
use cobalt::surrogate::FitSpec;
use cobalt::tasks::TaskDefinition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    CobaltCoupled,
    CobaltDecoupled,
    Cei,
    Random,
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlgorithmKind::CobaltCoupled => "cobalt-coupled",
            AlgorithmKind::CobaltDecoupled => "cobalt-decoupled",
            AlgorithmKind::Cei => "cei",
            AlgorithmKind::Random => "random",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "cobalt-coupled" => Ok(AlgorithmKind::CobaltCoupled),
            "cobalt-decoupled" => Ok(AlgorithmKind::CobaltDecoupled),
            "cei" => Ok(AlgorithmKind::Cei),
            "random" => Ok(AlgorithmKind::Random),
            other => anyhow::bail!("unknown algorithm `{other}`"),
        }
    }
}

/// One experiment: several independent trials of one algorithm on one task.
/// Every field is echoed verbatim into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub task: String,
    pub algorithm: AlgorithmKind,
    pub trials: usize,
    pub budget: usize,
    pub init_design_size: usize,
    /// Base seed; trial `i` runs with `seed + i`.
    pub seed: u64,
    pub delta: f64,
    pub beta: BetaMode,
    pub pi_rule: PiRule,
    pub refit_every: usize,
    pub standardize: bool,
    pub monotone_bounds: bool,
    pub objective_domain: ObjectiveDomain,
    pub acq_form: ObjectiveAcqForm,
    pub fit: FitSpec,
    /// Worker threads for trial execution; 0 uses the rayon default.
    pub parallelism: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: "rastrigin-1d-1c@60".to_string(),
            algorithm: AlgorithmKind::CobaltCoupled,
            trials: 15,
            budget: 2000,
            init_design_size: 10,
            seed: 0,
            delta: 0.1,
            beta: BetaMode::Scheduled,
            pi_rule: PiRule::Quadratic,
            refit_every: 10,
            standardize: true,
            monotone_bounds: true,
            objective_domain: ObjectiveDomain::RoiF,
            acq_form: ObjectiveAcqForm::Plain,
            fit: FitSpec::default(),
            parallelism: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.trials >= 1, "trials must be at least 1");
        anyhow::ensure!(self.budget >= 1, "budget must be at least 1");
        anyhow::ensure!(
            self.delta > 0.0 && self.delta < 1.0,
            "delta must lie in (0,1)"
        );
        Ok(())
    }

    /// Load from a TOML or JSON file (by extension).
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).context("parsing JSON config")?,
            _ => toml::from_str(&text).context("parsing TOML config")?,
        };
        Ok(config)
    }

    /// The per-trial optimizer configuration.
    pub fn optimizer_config(&self, trial: usize) -> OptimizerConfig {
        OptimizerConfig {
            mode: match self.algorithm {
                AlgorithmKind::CobaltDecoupled => EvalMode::Decoupled,
                _ => EvalMode::Coupled,
            },
            budget: self.budget,
            init_design_size: self.init_design_size,
            seed: self.trial_seed(trial),
            delta: self.delta,
            beta: self.beta,
            pi_rule: self.pi_rule,
            refit_every: self.refit_every,
            standardize: self.standardize,
            monotone_bounds: self.monotone_bounds,
            objective_domain: self.objective_domain,
            acq_form: self.acq_form,
            kernel: None,
            fit: self.fit.clone(),
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

/// Everything needed to reproduce and interpret a run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub task: TaskMetadata,
    pub csv_columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskMetadata {
    pub name: String,
    pub dimension: usize,
    pub grid_size: usize,
    pub num_constraints: usize,
    pub thresholds: Vec<f64>,
    pub noise_std: Vec<f64>,
    pub feasible_fraction: f64,
    pub feasibility_margin: f64,
    pub true_optimum_index: usize,
    pub true_optimum_value: f64,
}

impl TaskMetadata {
    pub fn from_task(task: &TaskDefinition) -> Self {
        TaskMetadata {
            name: task.name.clone(),
            dimension: task.grid.dim(),
            grid_size: task.grid.len(),
            num_constraints: task.num_constraints(),
            thresholds: task.thresholds.clone(),
            noise_std: task.noise_std.clone(),
            feasible_fraction: task.feasible_fraction,
            feasibility_margin: task.feasibility_margin,
            true_optimum_index: task.true_optimum.0,
            true_optimum_value: task.true_optimum.1,
        }
    }
}

pub fn csv_columns(num_constraints: usize) -> Vec<String> {
    let mut cols = vec![
        "t".to_string(),
        "x_index".to_string(),
        "aspect".to_string(),
        "reward".to_string(),
        "best_reward".to_string(),
        "simple_regret".to_string(),
        "alpha_t".to_string(),
        "roi_size".to_string(),
    ];
    for k in 1..=num_constraints {
        cols.push(format!("u_size_{k}"));
    }
    cols
}
