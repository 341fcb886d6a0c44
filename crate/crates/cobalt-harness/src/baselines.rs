//! Baseline algorithms sharing the trial-record schema: cEI (expected
//! improvement times probability of feasibility) and uniform random search.
//!
//! Both evaluate every function at the chosen point (coupled), use the same
//! initial-design and per-function noise streams as the main optimizer, and
//! fill the region columns with their degenerate values (the whole grid; no
//! undecided sets).

use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use cobalt::acquisition::{cei_select, Aspect};
use cobalt::kernel::Kernel;
use cobalt::optimizer::{init_design, EvalMode, OptimizerConfig, TrialRecord, TrialRow};
use cobalt::surrogate::Surrogate;
use cobalt::tasks::{RegretTracker, TaskDefinition};
use cobalt::{rng, Result};

/// The cEI incumbent: the best objective observation among queries whose
/// constraint observations all exceeded their thresholds. Observations are
/// noisy, so this is the standard noisy-incumbent variant.
fn update_incumbent(
    incumbent: &mut Option<f64>,
    observations: &[f64],
    thresholds: &[f64],
) {
    let feasible = observations[1..]
        .iter()
        .zip(thresholds)
        .all(|(y, &h)| *y > h);
    if feasible {
        let y_f = observations[0];
        *incumbent = Some(incumbent.map_or(y_f, |b| b.max(y_f)));
    }
}

fn observe_all(
    task: &TaskDefinition,
    surrogates: &mut [Surrogate],
    noise_rngs: &mut [rand_chacha::ChaCha12Rng],
    index: usize,
) -> Result<Vec<f64>> {
    let mut ys = Vec::with_capacity(surrogates.len());
    for (g, s) in surrogates.iter_mut().enumerate() {
        let noise: f64 = noise_rngs[g].sample(StandardNormal);
        let truth = if g == 0 {
            task.objective_value(index)
        } else {
            task.constraint_value(g - 1, index)
        };
        let y = truth + task.noise_std[g] * noise;
        s.observe(index, y)?;
        ys.push(y);
    }
    Ok(ys)
}

/// Shared scaffolding for coupled baselines: initial design, then one
/// selection per iteration from a caller-provided rule.
fn run_baseline(
    task: &TaskDefinition,
    config: &OptimizerConfig,
    mut select: impl FnMut(&[Surrogate], &Option<f64>, &mut rand_chacha::ChaCha12Rng) -> (usize, f64),
) -> Result<TrialRecord> {
    let num_funcs = task.num_constraints() + 1;
    let grid_size = task.grid.len();
    let grid: Arc<_> = task.grid.clone();
    let kernel = config
        .kernel
        .clone()
        .unwrap_or_else(|| Kernel::default_matern52(task.grid.dim()));

    let mut surrogates: Vec<Surrogate> = (0..num_funcs)
        .map(|g| {
            Surrogate::new(
                if g == 0 { "f".to_string() } else { format!("c{g}") },
                kernel.clone(),
                task.noise_std[g] * task.noise_std[g],
                config.standardize,
                grid.clone(),
            )
        })
        .collect::<Result<_>>()?;
    let mut noise_rngs: Vec<_> = (0..num_funcs)
        .map(|g| rng::stream(config.seed, "noise", g as u64))
        .collect();
    let mut algo_rng = rng::stream(config.seed, "baseline-select", 0);

    let mut record = TrialRecord {
        task_name: task.name.clone(),
        mode: EvalMode::Coupled,
        seed: config.seed,
        init_indices: Vec::new(),
        init_rewards: Vec::new(),
        rows: Vec::new(),
        aspect_counts: vec![0; num_funcs],
        bound_crossings: 0,
        empty_roi_fallbacks: 0,
        suspicious_negative_acq: 0,
        final_ci_width_fstar: f64::NAN,
        final_alpha: f64::NAN,
        theorem_width_ok: false,
    };

    let mut tracker = RegretTracker::default();
    let mut incumbent: Option<f64> = None;

    // Init rewards recorded but not fed to the tracker, mirroring the main
    // optimizer's regret accounting.
    let design = init_design(grid_size, config.init_design_size, config.seed)?;
    for &idx in &design {
        let ys = observe_all(task, &mut surrogates, &mut noise_rngs, idx)?;
        update_incumbent(&mut incumbent, &ys, &task.thresholds);
        record.init_indices.push(idx);
        record.init_rewards.push(task.reward(idx));
    }

    for t in 1..=config.budget {
        if config.refit_every > 0 && (t - 1) % config.refit_every == 0 {
            for s in &mut surrogates {
                if s.len() >= 2 {
                    s.refit(&config.fit)?;
                }
            }
        }
        let (chosen, score) = select(&surrogates, &incumbent, &mut algo_rng);
        let ys = observe_all(task, &mut surrogates, &mut noise_rngs, chosen)?;
        update_incumbent(&mut incumbent, &ys, &task.thresholds);
        record.aspect_counts[0] += 1;

        let reward = task.reward(chosen);
        tracker.record(reward);
        record.rows.push(TrialRow {
            t,
            chosen,
            aspect: Aspect::Objective,
            observations: ys.into_iter().map(Some).collect(),
            alpha: score,
            roi_size: grid_size,
            u_sizes: vec![0; task.num_constraints()],
            reward,
            best_reward: tracker.best_reward(),
            simple_regret: tracker.simple_regret(task.optimal_reward()),
            lcb_f_max: f64::NEG_INFINITY,
            fallback_level: 0,
        });
    }
    Ok(record)
}

/// Expected improvement times probability of feasibility over the full grid.
pub fn run_cei(task: &TaskDefinition, config: &OptimizerConfig) -> Result<TrialRecord> {
    run_baseline(task, config, |surrogates, incumbent, _| {
        let posts: Vec<_> = surrogates.iter().map(Surrogate::posterior_raw).collect();
        let constraint_posts: Vec<_> = posts[1..].iter().collect();
        cei_select(&posts[0], &constraint_posts, &task.thresholds, *incumbent)
    })
}

/// Uniform random search.
pub fn run_random(task: &TaskDefinition, config: &OptimizerConfig) -> Result<TrialRecord> {
    let grid_size = task.grid.len();
    run_baseline(task, config, |_, _, rng| (rng.gen_range(0..grid_size), 0.0))
}
