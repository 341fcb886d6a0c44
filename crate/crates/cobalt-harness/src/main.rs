//! Command-line interface: run experiments, validate the theory suites,
//! list tasks, and compute information-gain diagnostics.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cobalt_harness::config::{AlgorithmKind, ExperimentConfig};
use cobalt_harness::experiment::{print_summary, run_experiment};
use cobalt_harness::info_gain::{greedy_info_gain_curve, greedy_max_info_gain};
use cobalt_harness::validate::{
    validate_lemma1, validate_theorem1, validate_theorem3, SampledProblemSpec, TheoryReport,
    ValidateOptions,
};

#[derive(Parser)]
#[command(
    name = "cobalt-harness",
    about = "Constrained Bayesian optimization benchmarks and theory validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (several trials of one algorithm on one task).
    Run(RunArgs),
    /// Run a theory-validation suite; exits nonzero on assertion failure.
    Validate(ValidateArgs),
    /// List registered tasks with their key properties.
    Tasks,
    /// Greedy information-gain diagnostic for a task's grid.
    InfoGain(InfoGainArgs),
}

/// Flags mirror the experiment-config fields one-to-one; a config file
/// provides the base values and flags override it.
#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    algorithm: Option<AlgorithmKind>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    init_design_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Constant confidence multiplier (default: the scheduled multiplier).
    #[arg(long)]
    beta_constant: Option<f64>,
    #[arg(long)]
    refit_every: Option<usize>,
    #[arg(long)]
    standardize: Option<bool>,
    #[arg(long)]
    monotone_bounds: Option<bool>,
    /// Objective acquisition once the threshold is finite: plain | width-capped.
    #[arg(long)]
    acq_form: Option<String>,
    /// Objective proposal domain: roi-f | roi-combined.
    #[arg(long)]
    objective_domain: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory for manifest.json, regret_*.csv and summary.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Which suite: lemma1 | theorem1 | theorem3 | all.
    suite: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    budget: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    beta_constant: Option<f64>,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    #[arg(long, default_value_t = 1)]
    constraints: usize,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    #[arg(long, default_value_t = 0.1)]
    noise_std: f64,
    /// Minimum acceptable coverage rate for the lemma1 suite.
    #[arg(long, default_value_t = 0.82)]
    min_coverage: f64,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoGainArgs {
    #[arg(long)]
    task: String,
    /// Selection horizon T.
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    /// Observation noise variance; defaults to the task's objective noise.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Print the whole greedy curve instead of the final value.
    #[arg(long, default_value_t = false)]
    curve: bool,
}

fn merge_run_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &args.task {
        config.task = v.clone();
    }
    if let Some(v) = args.algorithm {
        config.algorithm = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.budget {
        config.budget = v;
    }
    if let Some(v) = args.init_design_size {
        config.init_design_size = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.delta {
        config.delta = v;
    }
    if let Some(v) = args.beta_constant {
        config.beta = cobalt::bounds::BetaMode::Constant { value: v };
    }
    if let Some(v) = args.refit_every {
        config.refit_every = v;
    }
    if let Some(v) = args.standardize {
        config.standardize = v;
    }
    if let Some(v) = args.monotone_bounds {
        config.monotone_bounds = v;
    }
    if let Some(v) = &args.acq_form {
        config.acq_form = match v.as_str() {
            "plain" => cobalt::acquisition::ObjectiveAcqForm::Plain,
            "width-capped" => cobalt::acquisition::ObjectiveAcqForm::WidthCapped,
            other => anyhow::bail!("unknown acquisition form `{other}`"),
        };
    }
    if let Some(v) = &args.objective_domain {
        config.objective_domain = match v.as_str() {
            "roi-f" => cobalt::optimizer::ObjectiveDomain::RoiF,
            "roi-combined" => cobalt::optimizer::ObjectiveDomain::RoiCombined,
            other => anyhow::bail!("unknown objective domain `{other}`"),
        };
    }
    if let Some(v) = args.parallelism {
        config.parallelism = v;
    }
    Ok(config)
}

fn report_suite(name: &str, report: &TheoryReport, min_coverage: Option<f64>) -> bool {
    let mut ok = report.passed();
    println!("== {name} ==");
    println!(
        "trials: {}  roi coverage: {:.3}  bounds coverage: {:.3}",
        report.trials, report.roi_coverage_rate, report.bounds_coverage_rate
    );
    println!(
        "crossings: {}  empty-roi fallbacks: {}  gamma_hat(greedy): {:.3}  C1: {:.4}  budget bound: {:.3e}",
        report.crossing_count,
        report.empty_roi_count,
        report.gamma_hat_greedy,
        report.c1,
        report.budget_bound
    );
    if let Some(min) = min_coverage {
        let pass = report.roi_coverage_rate >= min;
        println!(
            "coverage >= {min:.2}: {}",
            if pass { "PASS" } else { "FAIL" }
        );
        ok &= pass;
    }
    if report.violations.is_empty() {
        println!("chain assertions: PASS");
    } else {
        println!("chain assertions: FAIL");
        for v in &report.violations {
            println!("  violated: {v}");
        }
    }
    ok
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = merge_run_config(&args)?;
            let output = run_experiment(&config, &args.out)?;
            let summary_text =
                std::fs::read_to_string(output.dir.join("summary.json")).context("summary")?;
            let summary: serde_json::Value = serde_json::from_str(&summary_text)?;
            print_summary(&summary, std::io::stdout())?;
            println!("artifacts in {}", output.dir.display());
        }
        Command::Validate(args) => {
            let opts = ValidateOptions {
                trials: args.trials,
                budget: args.budget,
                delta: args.delta,
                seed: args.seed,
                beta_constant: args.beta_constant,
                problem: SampledProblemSpec {
                    grid_size: args.grid_size,
                    num_constraints: args.constraints,
                    margin: args.margin,
                    noise_std: args.noise_std,
                    ..SampledProblemSpec::default()
                },
            };
            let mut all_ok = true;
            let mut reports = serde_json::Map::new();
            let run = |suite: &str| -> Option<(TheoryReport, Option<f64>)> {
                match suite {
                    "lemma1" => Some((validate_lemma1(&opts), Some(args.min_coverage))),
                    "theorem1" => Some((validate_theorem1(&opts), None)),
                    "theorem3" => Some((validate_theorem3(&opts), None)),
                    _ => None,
                }
            };
            let suites: Vec<&str> = match args.suite.as_str() {
                "all" => vec!["lemma1", "theorem1", "theorem3"],
                s => vec![s],
            };
            for suite in suites {
                let (report, min_cov) = run(suite)
                    .with_context(|| format!("unknown suite `{suite}` (lemma1|theorem1|theorem3|all)"))?;
                all_ok &= report_suite(suite, &report, min_cov);
                reports.insert(suite.to_string(), serde_json::to_value(&report)?);
            }
            if let Some(path) = &args.out {
                std::fs::write(path, serde_json::to_string_pretty(&reports)?)?;
                println!("report written to {}", path.display());
            }
            anyhow::ensure!(all_ok, "validation suite failed");
        }
        Command::Tasks => {
            for name in cobalt::tasks::registry() {
                let task = cobalt::tasks::by_name(&name)?;
                println!(
                    "{name}: dim={} grid={} constraints={} feasible={:.1}% optimum f*={:.4} margin={:.3}",
                    task.grid.dim(),
                    task.grid.len(),
                    task.num_constraints(),
                    100.0 * task.feasible_fraction,
                    task.true_optimum.1,
                    task.feasibility_margin,
                );
            }
        }
        Command::InfoGain(args) => {
            let task = cobalt::tasks::by_name(&args.task)?;
            let sigma2 = args
                .sigma2
                .unwrap_or(task.noise_std[0] * task.noise_std[0]);
            let kernel = cobalt::kernel::Kernel::default_matern52(task.grid.dim());
            anyhow::ensure!(
                args.horizon <= task.grid.len(),
                "horizon exceeds grid size"
            );
            if args.curve {
                let curve = greedy_info_gain_curve(&kernel, &task.grid, args.horizon, sigma2)?;
                for (i, v) in curve.iter().enumerate() {
                    println!("{} {v:.10}", i + 1);
                }
            } else {
                let v = greedy_max_info_gain(&kernel, &task.grid, args.horizon, sigma2)?;
                println!(
                    "greedy info gain for {} at T={} (sigma2={sigma2}): {v:.10}",
                    args.task, args.horizon
                );
            }
        }
    }
    Ok(())
}
