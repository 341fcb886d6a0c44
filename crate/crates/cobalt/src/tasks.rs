//! Benchmark task definitions, the reward formalism, and simple regret.
//!
//! A task bundles a candidate grid with noise-free oracles for the objective
//! and each constraint, per-function observation noise levels, and the
//! grid-scanned constrained optimum. Rewards use the noise-free oracles: a
//! queried point earns its objective value when every constraint strictly
//! exceeds its threshold and is infeasible otherwise. Infeasibility is a
//! typed sentinel, not a float, so it cannot leak into arithmetic.

use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::grid::CandidateGrid;
use crate::rng;
use crate::sobol;
use crate::{Error, Result};

/// Reward of one queried point (noise-free oracle semantics).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reward {
    Feasible(f64),
    Infeasible,
}

impl Reward {
    pub fn feasible_value(self) -> Option<f64> {
        match self {
            Reward::Feasible(v) => Some(v),
            Reward::Infeasible => None,
        }
    }

    /// CSV form: full-precision float or the `inf_regret` sentinel.
    pub fn to_csv_field(self) -> String {
        match self {
            Reward::Feasible(v) => format!("{v:.16e}"),
            Reward::Infeasible => "inf_regret".to_string(),
        }
    }
}

/// Simple regret; infinite until the first feasible query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regret {
    Infinite,
    Value(f64),
}

impl Regret {
    pub fn value(self) -> Option<f64> {
        match self {
            Regret::Value(v) => Some(v),
            Regret::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Regret::Value(_))
    }

    pub fn to_csv_field(self) -> String {
        match self {
            Regret::Value(v) => format!("{v:.16e}"),
            Regret::Infinite => "inf_regret".to_string(),
        }
    }
}

/// Best-feasible-so-far tracker.
#[derive(Debug, Clone, Copy, Default)]
pub struct RegretTracker {
    best: Option<f64>,
}

impl RegretTracker {
    pub fn record(&mut self, reward: Reward) {
        if let Reward::Feasible(v) = reward {
            self.best = Some(self.best.map_or(v, |b| b.max(v)));
        }
    }

    pub fn best_reward(&self) -> Reward {
        self.best.map_or(Reward::Infeasible, Reward::Feasible)
    }

    /// `r(x*) - best feasible so far`, infinite before any feasible query.
    pub fn simple_regret(&self, optimal_reward: f64) -> Regret {
        match self.best {
            Some(b) => Regret::Value(optimal_reward - b),
            None => Regret::Infinite,
        }
    }
}

type IndexOracle = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// One benchmark problem over a fixed grid.
#[derive(Clone)]
pub struct TaskDefinition {
    pub name: String,
    pub grid: Arc<CandidateGrid>,
    objective: IndexOracle,
    constraints: Vec<IndexOracle>,
    pub thresholds: Vec<f64>,
    /// Observation noise std per function, `[f, c_1, .., c_K]`.
    pub noise_std: Vec<f64>,
    /// Clearance of the optimum above every threshold (Assumption-2 margin).
    pub feasibility_margin: f64,
    /// Grid index and objective value of the constrained optimum.
    pub true_optimum: (usize, f64),
    /// Fraction of grid points satisfying every constraint strictly.
    pub feasible_fraction: f64,
}

impl std::fmt::Debug for TaskDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TaskDefinition")
            .field("name", &self.name)
            .field("grid_size", &self.grid.len())
            .field("dim", &self.grid.dim())
            .field("num_constraints", &self.thresholds.len())
            .field("true_optimum", &self.true_optimum)
            .field("feasible_fraction", &self.feasible_fraction)
            .finish()
    }
}

impl TaskDefinition {
    /// Assemble a task, scanning the grid for the constrained optimum and
    /// validating the feasibility margin. A task with an empty feasible set
    /// is rejected.
    pub fn assemble(
        name: impl Into<String>,
        grid: Arc<CandidateGrid>,
        objective: IndexOracle,
        constraints: Vec<IndexOracle>,
        thresholds: Vec<f64>,
        noise_std: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if constraints.len() != thresholds.len() {
            return Err(Error::Contract("one threshold per constraint".into()));
        }
        if noise_std.len() != constraints.len() + 1 {
            return Err(Error::Contract(
                "noise_std must list the objective and every constraint".into(),
            ));
        }
        let mut best: Option<(usize, f64)> = None;
        let mut feasible_count = 0usize;
        for i in 0..grid.len() {
            let ok = constraints
                .iter()
                .zip(&thresholds)
                .all(|(c, &h)| c(i) > h);
            if ok {
                feasible_count += 1;
                let v = objective(i);
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((i, v));
                }
            }
        }
        let true_optimum = best.ok_or_else(|| {
            Error::Contract(format!("task `{name}` has an empty feasible set"))
        })?;
        let feasibility_margin = constraints
            .iter()
            .zip(&thresholds)
            .map(|(c, &h)| c(true_optimum.0) - h)
            .fold(f64::INFINITY, f64::min);
        assert!(
            feasibility_margin > 0.0,
            "optimum must clear every threshold strictly"
        );
        let feasible_fraction = feasible_count as f64 / grid.len() as f64;
        Ok(TaskDefinition {
            name,
            grid,
            objective,
            constraints,
            thresholds,
            noise_std,
            feasibility_margin,
            true_optimum,
            feasible_fraction,
        })
    }

    /// Assemble a task whose oracles are lookup tables over the grid, as
    /// used for prior-sampled validation problems.
    pub fn from_tables(
        name: impl Into<String>,
        grid: Arc<CandidateGrid>,
        objective_values: Vec<f64>,
        constraint_values: Vec<Vec<f64>>,
        thresholds: Vec<f64>,
        noise_std: Vec<f64>,
    ) -> Result<Self> {
        if objective_values.len() != grid.len()
            || constraint_values.iter().any(|c| c.len() != grid.len())
        {
            return Err(Error::Contract("value tables must cover the grid".into()));
        }
        let objective: IndexOracle = {
            let vals = Arc::new(objective_values);
            Arc::new(move |i| vals[i])
        };
        let constraints: Vec<IndexOracle> = constraint_values
            .into_iter()
            .map(|c| {
                let vals = Arc::new(c);
                let f: IndexOracle = Arc::new(move |i| vals[i]);
                f
            })
            .collect();
        TaskDefinition::assemble(name, grid, objective, constraints, thresholds, noise_std)
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, index: usize) -> f64 {
        (self.objective)(index)
    }

    pub fn constraint_value(&self, k: usize, index: usize) -> f64 {
        (self.constraints[k])(index)
    }

    /// Noise-free reward of a grid point: the objective value when every
    /// constraint strictly exceeds its threshold, infeasible otherwise.
    pub fn reward(&self, index: usize) -> Reward {
        let ok = self
            .constraints
            .iter()
            .zip(&self.thresholds)
            .all(|(c, &h)| c(index) > h);
        if ok {
            Reward::Feasible((self.objective)(index))
        } else {
            Reward::Infeasible
        }
    }

    /// Reward of the constrained optimum.
    pub fn optimal_reward(&self) -> f64 {
        self.true_optimum.1
    }
}

/// Negated 1-D Rastrigin: global (unconstrained) maximum of 0 at the origin.
pub fn rastrigin_1d(x: f64) -> f64 {
    -10.0 - (x * x - 10.0 * (2.0 * std::f64::consts::PI * x).cos())
}

/// The Rastrigin task's single constraint.
pub fn rastrigin_constraint(x: f64) -> f64 {
    (x + 0.7).abs().sqrt()
}

/// Negated 5-D Ackley: global maximum of 0 at the origin.
pub fn ackley5(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x
        .iter()
        .map(|v| (2.0 * std::f64::consts::PI * v).cos())
        .sum::<f64>()
        / d;
    -(-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E)
}

/// First Ackley constraint: two feasible shells around distance 5.5 from 1.
pub fn ackley_constraint1(x: &[f64]) -> f64 {
    let dist = x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>().sqrt();
    (dist - 5.5) * (dist - 5.5) - 1.0
}

/// Second Ackley constraint: a central hypercube.
pub fn ackley_constraint2(x: &[f64]) -> f64 {
    let inf_norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    -inf_norm * inf_norm + 9.0
}

/// Feasible-fraction labels of the Rastrigin threshold sweep (percent).
pub const RASTRIGIN_SWEEP: [u32; 5] = [10, 30, 60, 80, 95];

const RASTRIGIN_GRID: usize = 1000;
const RASTRIGIN_NOISE: f64 = 0.1;

fn rastrigin_grid() -> Arc<CandidateGrid> {
    Arc::new(CandidateGrid::linspace_1d(-5.0, 5.0, RASTRIGIN_GRID))
}

/// Threshold whose strict superlevel set on the grid holds exactly
/// `target_percent`% of the points. The canonical 60% variant uses the
/// closed-form `sqrt(2)` threshold; others solve on the grid by splitting
/// consecutive order statistics of the constraint values.
fn rastrigin_threshold(target_percent: u32) -> Result<f64> {
    if target_percent == 60 {
        return Ok(2.0_f64.sqrt());
    }
    if !RASTRIGIN_SWEEP.contains(&target_percent) {
        return Err(Error::UnknownTask(format!(
            "rastrigin-1d-1c@{target_percent} (known sweep: {RASTRIGIN_SWEEP:?})"
        )));
    }
    let grid = rastrigin_grid();
    let mut cvals: Vec<f64> = grid.points().map(|p| rastrigin_constraint(p[0])).collect();
    cvals.sort_by(f64::total_cmp);
    cvals.reverse(); // descending
    let m = (RASTRIGIN_GRID * target_percent as usize) / 100;
    assert!(m > 0 && m < RASTRIGIN_GRID);
    // keep exactly the m largest values strictly above the threshold
    Ok(0.5 * (cvals[m - 1] + cvals[m]))
}

/// The 1-D Rastrigin task with one constraint, parameterized by the
/// feasible-fraction label of the threshold sweep.
pub fn rastrigin_1d_1c(target_percent: u32) -> Result<TaskDefinition> {
    let threshold = rastrigin_threshold(target_percent)?;
    let grid = rastrigin_grid();
    let g = grid.clone();
    let objective: IndexOracle = Arc::new(move |i| rastrigin_1d(g.point(i)[0]));
    let g = grid.clone();
    let constraint: IndexOracle = Arc::new(move |i| rastrigin_constraint(g.point(i)[0]));
    TaskDefinition::assemble(
        format!("rastrigin-1d-1c@{target_percent}"),
        grid,
        objective,
        vec![constraint],
        vec![threshold],
        vec![RASTRIGIN_NOISE; 2],
    )
}

const ACKLEY_GRID: usize = 4096;
const ACKLEY_SOBOL_SEED: u64 = 1;
pub const ACKLEY_BOUNDS: [(f64, f64); 5] = [(-5.0, 3.0); 5];

/// The 5-D Ackley task with two constraints on a scrambled Sobol grid.
pub fn ackley_5d_2c() -> Result<TaskDefinition> {
    let pts = sobol::scale_to_box(
        &sobol::sobol_points(5, ACKLEY_GRID, ACKLEY_SOBOL_SEED),
        &ACKLEY_BOUNDS,
    );
    let grid = Arc::new(CandidateGrid::from_points(&pts));
    let g = grid.clone();
    let objective: IndexOracle = Arc::new(move |i| ackley5(g.point(i)));
    let g = grid.clone();
    let c1: IndexOracle = Arc::new(move |i| ackley_constraint1(g.point(i)));
    let g = grid.clone();
    let c2: IndexOracle = Arc::new(move |i| ackley_constraint2(g.point(i)));
    TaskDefinition::assemble(
        "ackley-5d-2c",
        grid,
        objective,
        vec![c1, c2],
        vec![0.0, 0.0],
        vec![0.1; 3],
    )
}

/// Monte-Carlo estimate of the Ackley feasible volume fraction over the
/// continuous box (the grid fraction is exact but the box fraction is what
/// the task advertises).
pub fn ackley_feasible_fraction_mc(samples: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut rng = rng::stream(seed, "ackley-mc", 0);
    let mut hits = 0usize;
    let mut x = [0.0_f64; 5];
    for _ in 0..samples {
        for (v, &(lo, hi)) in x.iter_mut().zip(&ACKLEY_BOUNDS) {
            *v = rng.gen_range(lo..hi);
        }
        if ackley_constraint1(&x) > 0.0 && ackley_constraint2(&x) > 0.0 {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

/// Percent-point transform of a probabilistic threshold: the deterministic
/// threshold equivalent to requiring `Pr(Y > h) >= mu` under Gaussian
/// observation noise of std `sigma`.
pub fn ppf_threshold(h: f64, sigma: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Contract(format!("confidence must lie in (0,1), got {mu}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Contract("sigma must be positive".into()));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(h + sigma * n.inverse_cdf(mu))
}

/// Recompute the simple-regret series from a sequence of rewards.
pub fn simple_regret_curve(rewards: &[Reward], optimal_reward: f64) -> Vec<Regret> {
    let mut tracker = RegretTracker::default();
    rewards
        .iter()
        .map(|&r| {
            tracker.record(r);
            tracker.simple_regret(optimal_reward)
        })
        .collect()
}

/// All registered task names.
pub fn registry() -> Vec<String> {
    let mut names: Vec<String> = RASTRIGIN_SWEEP
        .iter()
        .map(|p| format!("rastrigin-1d-1c@{p}"))
        .collect();
    names.push("ackley-5d-2c".to_string());
    names
}

/// Look a task up by registry name.
pub fn by_name(name: &str) -> Result<TaskDefinition> {
    if let Some(rest) = name.strip_prefix("rastrigin-1d-1c@") {
        let pct: u32 = rest
            .parse()
            .map_err(|_| Error::UnknownTask(name.to_string()))?;
        return rastrigin_1d_1c(pct);
    }
    if name == "ackley-5d-2c" {
        return ackley_5d_2c();
    }
    Err(Error::UnknownTask(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rastrigin_origin_is_unconstrained_max() {
        assert!(rastrigin_1d(0.0).abs() < 1e-12);
        assert!(rastrigin_1d(0.3) < 0.0);
        assert!(rastrigin_1d(-4.9) < 0.0);
    }

    #[test]
    fn rastrigin_60_feasible_fraction_exact() {
        let task = rastrigin_1d_1c(60).unwrap();
        assert!((task.feasible_fraction - 0.60).abs() <= 0.01);
        assert_eq!(task.thresholds[0], 2.0_f64.sqrt());
    }

    #[test]
    fn rastrigin_60_optimum_near_two() {
        let task = rastrigin_1d_1c(60).unwrap();
        let (idx, fstar) = task.true_optimum;
        let x = task.grid.point(idx)[0];
        assert!((x - 2.0).abs() < 0.05, "x* = {x}");
        assert!((fstar + 4.0).abs() < 0.05, "f* = {fstar}");
        // independent re-scan
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0;
        for i in 0..task.grid.len() {
            let xi = task.grid.point(i)[0];
            if rastrigin_constraint(xi) > 2.0_f64.sqrt() {
                let v = rastrigin_1d(xi);
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
        }
        assert_eq!(best_i, idx);
        assert_eq!(best, fstar);
    }

    #[test]
    fn rastrigin_sweep_hits_target_fractions() {
        for pct in RASTRIGIN_SWEEP {
            let task = rastrigin_1d_1c(pct).unwrap();
            let target = pct as f64 / 100.0;
            assert!(
                (task.feasible_fraction - target).abs() <= 0.01,
                "variant {pct}: fraction {}",
                task.feasible_fraction
            );
            assert!(task.feasibility_margin > 0.0);
        }
    }

    #[test]
    fn unknown_variant_rejected() {
        assert!(rastrigin_1d_1c(42).is_err());
        assert!(by_name("rastrigin-1d-1c@42").is_err());
        assert!(by_name("nonesuch").is_err());
    }

    #[test]
    fn ackley_oracle_values() {
        assert!(ackley5(&[0.0; 5]).abs() < 1e-12);
        // boundary arithmetic for the hypercube constraint
        assert!(ackley_constraint2(&[2.9; 5]) > 0.0);
        assert!(ackley_constraint2(&[3.0; 5]) <= 0.0);
    }

    #[test]
    fn reward_uses_strict_inequality() {
        let grid = Arc::new(CandidateGrid::linspace_1d(0.0, 1.0, 3));
        let obj: IndexOracle = Arc::new(|i| i as f64);
        // constraint exactly at the threshold on index 1
        let con: IndexOracle = Arc::new(|i| match i {
            0 => 1.0,
            1 => 0.0,
            _ => -1.0,
        });
        let task = TaskDefinition::assemble(
            "toy",
            grid,
            obj,
            vec![con],
            vec![0.0],
            vec![0.1, 0.1],
        )
        .unwrap();
        assert_eq!(task.reward(0), Reward::Feasible(0.0));
        assert_eq!(task.reward(1), Reward::Infeasible);
        assert_eq!(task.reward(2), Reward::Infeasible);
    }

    #[test]
    fn ppf_threshold_examples() {
        assert_eq!(ppf_threshold(0.0, 1.0, 0.5).unwrap(), 0.0);
        assert!((ppf_threshold(0.0, 1.0, 0.975).unwrap() - 1.959963984540054).abs() < 1e-6);
        assert_eq!(ppf_threshold(3.0, 2.0, 0.5).unwrap(), 3.0);
        assert!(ppf_threshold(0.0, 1.0, 0.0).is_err());
        assert!(ppf_threshold(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn regret_curve_basics() {
        let curve = simple_regret_curve(
            &[Reward::Infeasible, Reward::Feasible(1.0), Reward::Feasible(3.0)],
            3.0,
        );
        assert_eq!(curve[0], Regret::Infinite);
        assert_eq!(curve[1], Regret::Value(2.0));
        assert_eq!(curve[2], Regret::Value(0.0));
    }

    #[test]
    fn regret_all_sentinel_without_feasible_queries() {
        let curve = simple_regret_curve(&[Reward::Infeasible; 4], 1.0);
        assert!(curve.iter().all(|r| *r == Regret::Infinite));
    }

    #[test]
    fn regret_zero_series_when_first_query_optimal() {
        let task = rastrigin_1d_1c(60).unwrap();
        let r = task.reward(task.true_optimum.0);
        let curve = simple_regret_curve(&[r, Reward::Infeasible], task.optimal_reward());
        assert_eq!(curve[0], Regret::Value(0.0));
        assert_eq!(curve[1], Regret::Value(0.0));
    }

    #[test]
    fn regret_non_increasing() {
        let rewards = [
            Reward::Infeasible,
            Reward::Feasible(-5.0),
            Reward::Feasible(-9.0),
            Reward::Feasible(-1.0),
            Reward::Infeasible,
        ];
        let curve = simple_regret_curve(&rewards, 0.0);
        let mut prev = f64::INFINITY;
        for r in curve {
            if let Regret::Value(v) = r {
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn csv_fields_serialize_sentinels() {
        assert_eq!(Reward::Infeasible.to_csv_field(), "inf_regret");
        assert_eq!(Regret::Infinite.to_csv_field(), "inf_regret");
        assert!(Reward::Feasible(1.5).to_csv_field().starts_with("1.5"));
    }

    #[test]
    fn registry_roundtrip() {
        for name in registry() {
            let task = by_name(&name).unwrap();
            assert_eq!(task.name, name);
        }
    }
}
