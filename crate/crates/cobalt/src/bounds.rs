//! Confidence bounds: the multiplier schedule and monotone intersection.
//!
//! Bounds are `mean ± sqrt(beta_t) * std` per grid point. The scheduled
//! multiplier `beta_t = 2 log(2 (K+1) |grid| pi_t / delta)` with
//! `sum_t 1/pi_t = 1` makes the event "every function lies inside its bounds
//! at every grid point at every iteration" hold with probability at least
//! `1 - delta` for prior-sampled functions. Intersecting each iteration's
//! raw bounds with the previous table keeps the interval at every point
//! non-increasing even when the posterior alone would widen it.

use serde::{Deserialize, Serialize};

/// Valid series for the per-iteration union bound: `sum_t 1/pi_t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PiRule {
    /// `pi_t = pi^2 t^2 / 6` (Basel series).
    #[default]
    Quadratic,
    /// `pi_t = 2^t` (geometric series).
    Geometric,
}

impl PiRule {
    pub fn pi(self, t: usize) -> f64 {
        match self {
            PiRule::Quadratic => {
                let t = t as f64;
                std::f64::consts::PI * std::f64::consts::PI * t * t / 6.0
            }
            PiRule::Geometric => 2.0_f64.powi(t as i32),
        }
    }
}

/// Scheduled or constant confidence multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum BetaMode {
    Scheduled,
    Constant { value: f64 },
}

/// The multiplier schedule for a problem with `num_constraints` unknown
/// constraints on a grid of `grid_size` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub delta: f64,
    pub num_constraints: usize,
    pub grid_size: usize,
    pub mode: BetaMode,
    #[serde(default)]
    pub pi_rule: PiRule,
}

impl BetaSchedule {
    pub fn scheduled(delta: f64, num_constraints: usize, grid_size: usize) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
        BetaSchedule {
            delta,
            num_constraints,
            grid_size,
            mode: BetaMode::Scheduled,
            pi_rule: PiRule::Quadratic,
        }
    }

    pub fn constant(value: f64) -> Self {
        assert!(value > 0.0, "constant beta must be positive");
        BetaSchedule {
            delta: 0.1,
            num_constraints: 0,
            grid_size: 0,
            mode: BetaMode::Constant { value },
            pi_rule: PiRule::Quadratic,
        }
    }

    /// `beta_t`; `t >= 1`.
    pub fn beta(&self, t: usize) -> f64 {
        assert!(t >= 1, "iterations are 1-based");
        match self.mode {
            BetaMode::Constant { value } => value,
            BetaMode::Scheduled => {
                let k1 = (self.num_constraints + 1) as f64;
                let d = self.grid_size as f64;
                2.0 * (2.0 * k1 * d * self.pi_rule.pi(t) / self.delta).ln()
            }
        }
    }

    /// The scheduled value at horizon `T`, for running constant-beta
    /// experiments comparable to a scheduled run of the same length.
    pub fn scheduled_value_at(&self, t: usize) -> f64 {
        let k1 = (self.num_constraints + 1) as f64;
        let d = self.grid_size as f64;
        2.0 * (2.0 * k1 * d * self.pi_rule.pi(t) / self.delta).ln()
    }
}

/// Raw upper/lower bound arrays for one function at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsPair {
    pub ucb: Vec<f64>,
    pub lcb: Vec<f64>,
}

/// `ucb = mean + sqrt(beta)·std`, `lcb = mean − sqrt(beta)·std`, pointwise.
pub fn compute_bounds(mean: &[f64], std_dev: &[f64], beta: f64) -> BoundsPair {
    assert!(beta > 0.0, "beta must be positive");
    assert_eq!(mean.len(), std_dev.len());
    let sb = beta.sqrt();
    let ucb = mean.iter().zip(std_dev).map(|(m, s)| m + sb * s).collect();
    let lcb = mean.iter().zip(std_dev).map(|(m, s)| m - sb * s).collect();
    BoundsPair { ucb, lcb }
}

/// Monotone-intersected bounds for one function, carried across iterations.
#[derive(Debug, Clone)]
pub struct BoundsTable {
    pub ucb: Vec<f64>,
    pub lcb: Vec<f64>,
    pub iteration: usize,
    /// Number of points where intersection crossed (lcb > ucb) and the
    /// interval was collapsed to its midpoint.
    pub crossings: u64,
}

impl BoundsTable {
    /// The table before any iteration: vacuous bounds.
    pub fn unbounded(grid_size: usize) -> Self {
        BoundsTable {
            ucb: vec![f64::INFINITY; grid_size],
            lcb: vec![f64::NEG_INFINITY; grid_size],
            iteration: 0,
            crossings: 0,
        }
    }

    /// Intersect raw bounds with this table: `ucb_t = min(raw, previous)`,
    /// `lcb_t = max(raw, previous)`. A crossing (lcb above ucb) collapses the
    /// interval to its midpoint and is counted.
    pub fn intersect(&self, raw: &BoundsPair) -> BoundsTable {
        assert_eq!(raw.ucb.len(), self.ucb.len());
        let mut out = BoundsTable {
            ucb: Vec::with_capacity(self.ucb.len()),
            lcb: Vec::with_capacity(self.lcb.len()),
            iteration: self.iteration + 1,
            crossings: self.crossings,
        };
        for i in 0..self.ucb.len() {
            let mut u = raw.ucb[i].min(self.ucb[i]);
            let mut l = raw.lcb[i].max(self.lcb[i]);
            if l > u {
                let mid = 0.5 * (l + u);
                u = mid;
                l = mid;
                out.crossings += 1;
            }
            out.ucb.push(u);
            out.lcb.push(l);
        }
        out
    }

    /// Adopt raw bounds without intersecting (monotone enforcement off).
    pub fn replace(&self, raw: &BoundsPair) -> BoundsTable {
        BoundsTable {
            ucb: raw.ucb.clone(),
            lcb: raw.lcb.clone(),
            iteration: self.iteration + 1,
            crossings: self.crossings,
        }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.ucb[i] - self.lcb[i]
    }
}
