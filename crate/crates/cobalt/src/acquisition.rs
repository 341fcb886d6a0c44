//! Per-aspect acquisition proposals, cross-aspect selection, and the cEI
//! baseline.
//!
//! Each aspect (the objective, or one constraint) nominates a candidate from
//! its own legal domain:
//!
//! * a constraint nominates the widest confidence interval over its
//!   undecided set only — resolving points already classified teaches
//!   nothing about the feasible region;
//! * the objective nominates from its region of interest, scoring
//!   `ucb - lcb_f_max` once a confidently-feasible threshold exists and the
//!   plain interval width before that.
//!
//! The proposal with the largest acquisition value wins; values are
//! interval-derived on a shared (standardized) scale, which is what makes
//! the adaptive trade-off between optimizing and constraint learning
//! meaningful.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::bounds::BoundsTable;
use crate::gp::PosteriorTable;

/// Which unknown function a proposal queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aspect {
    Objective,
    /// Constraint index, 0-based.
    Constraint(usize),
}

impl std::fmt::Display for Aspect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Aspect::Objective => write!(f, "f"),
            Aspect::Constraint(k) => write!(f, "c{}", k + 1),
        }
    }
}

/// One aspect's nominated candidate and acquisition value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectProposal {
    pub aspect: Aspect,
    pub candidate: usize,
    pub value: f64,
}

/// Form of the objective acquisition once `lcb_f_max` is finite.
///
/// `Plain` scores `ucb(x) - lcb_f_max` verbatim. `WidthCapped` scores
/// `ucb(x) - max(lcb_f_max, lcb(x))`, i.e. caps the value at the interval
/// width at `x`. The two branches of the plain form are discontinuous when
/// the threshold first becomes finite, which lets the selected acquisition
/// value jump upward mid-run; the capped form coincides with the plain form
/// wherever `lcb(x) <= lcb_f_max`, degrades to the width form exactly when
/// the threshold is `-inf`, and keeps the selected value non-increasing
/// under monotone bounds. The capped form is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveAcqForm {
    Plain,
    #[default]
    WidthCapped,
}

/// Tolerance below which a negative acquisition value is considered float
/// noise rather than a logic error.
const NEGATIVE_TOL: f64 = -1e-12;

fn clamp_value(v: f64, suspicious: &mut u64) -> f64 {
    if v < 0.0 {
        if v < NEGATIVE_TOL {
            *suspicious += 1;
        }
        0.0
    } else {
        v
    }
}

/// Objective proposal over its region of interest. The domain must be
/// nonempty (the threshold-achieving point always belongs to it). Lowest
/// index wins ties.
pub fn acq_objective(
    bounds_f: &BoundsTable,
    roi_objective: &[usize],
    lcb_f_max: f64,
    form: ObjectiveAcqForm,
    suspicious_negatives: &mut u64,
) -> AspectProposal {
    assert!(
        !roi_objective.is_empty(),
        "objective ROI must be nonempty after fallback"
    );
    let mut best_idx = roi_objective[0];
    let mut best_val = f64::NEG_INFINITY;
    for &i in roi_objective {
        let v = if lcb_f_max == f64::NEG_INFINITY {
            bounds_f.ucb[i] - bounds_f.lcb[i]
        } else {
            match form {
                ObjectiveAcqForm::Plain => bounds_f.ucb[i] - lcb_f_max,
                ObjectiveAcqForm::WidthCapped => bounds_f.ucb[i] - lcb_f_max.max(bounds_f.lcb[i]),
            }
        };
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    AspectProposal {
        aspect: Aspect::Objective,
        candidate: best_idx,
        value: clamp_value(best_val, suspicious_negatives),
    }
}

/// Constraint proposal: widest interval over the undecided set, or `None`
/// when nothing is undecided. Lowest index wins ties.
pub fn acq_constraint(
    bounds_c: &BoundsTable,
    undecided: &[usize],
    constraint_index: usize,
    suspicious_negatives: &mut u64,
) -> Option<AspectProposal> {
    if undecided.is_empty() {
        return None;
    }
    let mut best_idx = undecided[0];
    let mut best_val = f64::NEG_INFINITY;
    for &i in undecided {
        let v = bounds_c.ucb[i] - bounds_c.lcb[i];
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    Some(AspectProposal {
        aspect: Aspect::Constraint(constraint_index),
        candidate: best_idx,
        value: clamp_value(best_val, suspicious_negatives),
    })
}

/// Pick the proposal with the maximal acquisition value. Ties break
/// objective-first, then by ascending constraint index; the caller passes
/// proposals in that order and this keeps the first of equals.
pub fn select_aspect(proposals: &[AspectProposal]) -> AspectProposal {
    assert!(!proposals.is_empty(), "the objective proposal always exists");
    let mut best = proposals[0];
    for p in &proposals[1..] {
        if p.value > best.value {
            best = *p;
        }
    }
    best
}

/// Expected improvement for maximization at one point.
fn expected_improvement(mean: f64, std_dev: f64, best: f64) -> f64 {
    if std_dev <= 1e-12 {
        return (mean - best).max(0.0);
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    let z = (mean - best) / std_dev;
    std_dev * (z * n.cdf(z) + n.pdf(z))
}

/// Probability that a Gaussian with the given posterior exceeds `threshold`.
fn prob_feasible(mean: f64, std_dev: f64, threshold: f64) -> f64 {
    if std_dev <= 1e-12 {
        return if mean > threshold { 1.0 } else { 0.0 };
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.cdf((mean - threshold) / std_dev)
}

/// cEI baseline: expected improvement times the probability of feasibility,
/// maximized over the whole grid. Without a feasible incumbent the score is
/// feasibility probability alone. Returns the winning grid index and score.
pub fn cei_select(
    objective: &PosteriorTable,
    constraints: &[&PosteriorTable],
    thresholds: &[f64],
    best_feasible: Option<f64>,
) -> (usize, f64) {
    assert_eq!(constraints.len(), thresholds.len());
    let m = objective.mean.len();
    assert!(m > 0);
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..m {
        let mut pof = 1.0;
        for (c, &h) in constraints.iter().zip(thresholds) {
            pof *= prob_feasible(c.mean[i], c.std_dev[i], h);
        }
        let v = match best_feasible {
            Some(b) => expected_improvement(objective.mean[i], objective.std_dev[i], b) * pof,
            None => pof,
        };
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    (best_idx, best_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(lcb: Vec<f64>, ucb: Vec<f64>) -> BoundsTable {
        BoundsTable {
            ucb,
            lcb,
            iteration: 1,
            crossings: 0,
        }
    }

    #[test]
    fn objective_plain_form_examples() {
        let mut neg = 0;
        let b = table(vec![0.0, 0.0], vec![3.0, 2.0]);
        let p = acq_objective(&b, &[0, 1], 1.0, ObjectiveAcqForm::Plain, &mut neg);
        assert_eq!(p.candidate, 0);
        assert_eq!(p.value, 2.0);
        assert_eq!(neg, 0);
    }

    #[test]
    fn objective_width_branch_when_no_threshold() {
        let mut neg = 0;
        let b = table(vec![0.25, -0.5], vec![0.75, 1.0]);
        let p = acq_objective(
            &b,
            &[0, 1],
            f64::NEG_INFINITY,
            ObjectiveAcqForm::Plain,
            &mut neg,
        );
        assert_eq!(p.candidate, 1);
        assert!((p.value - 1.5).abs() < 1e-15);
    }

    #[test]
    fn objective_tie_breaks_to_lowest_index() {
        let mut neg = 0;
        let b = table(vec![0.0; 10], vec![2.0; 10]);
        let p = acq_objective(&b, &[3, 7], 1.0, ObjectiveAcqForm::Plain, &mut neg);
        assert_eq!(p.candidate, 3);
    }

    #[test]
    fn capped_form_limits_value_to_width() {
        let mut neg = 0;
        // point 0: huge gap to lcb_f_max but narrow interval
        let b = table(vec![5.0, -1.0], vec![6.0, 4.9]);
        let plain = acq_objective(&b, &[0, 1], -2.0, ObjectiveAcqForm::Plain, &mut neg);
        assert_eq!(plain.candidate, 0);
        assert_eq!(plain.value, 8.0);
        let capped = acq_objective(&b, &[0, 1], -2.0, ObjectiveAcqForm::WidthCapped, &mut neg);
        assert_eq!(capped.candidate, 1);
        assert!((capped.value - 5.9).abs() < 1e-12);
    }

    #[test]
    fn capped_equals_plain_when_lcb_below_threshold() {
        let mut neg = 0;
        let b = table(vec![-3.0, -4.0], vec![2.0, 1.0]);
        let a = acq_objective(&b, &[0, 1], -1.0, ObjectiveAcqForm::Plain, &mut neg);
        let c = acq_objective(&b, &[0, 1], -1.0, ObjectiveAcqForm::WidthCapped, &mut neg);
        assert_eq!(a, c);
    }

    #[test]
    fn constraint_none_when_undecided_empty() {
        let mut neg = 0;
        let b = table(vec![1.0], vec![2.0]);
        assert!(acq_constraint(&b, &[], 0, &mut neg).is_none());
    }

    #[test]
    fn constraint_picks_widest_undecided() {
        let mut neg = 0;
        let mut lcb = vec![0.0; 10];
        let mut ucb = vec![0.0; 10];
        lcb[4] = -0.1;
        ucb[4] = 0.1; // width 0.2
        lcb[9] = -0.45;
        ucb[9] = 0.45; // width 0.9
        let b = table(lcb, ucb);
        let p = acq_constraint(&b, &[4, 9], 0, &mut neg).unwrap();
        assert_eq!(p.candidate, 9);
        assert!((p.value - 0.9).abs() < 1e-15);
    }

    #[test]
    fn constraint_ignores_points_outside_undecided() {
        let mut neg = 0;
        // index 0 has a huge width but is not in U
        let b = table(vec![-10.0, -0.1], vec![10.0, 0.2]);
        let p = acq_constraint(&b, &[1], 0, &mut neg).unwrap();
        assert_eq!(p.candidate, 1);
    }

    #[test]
    fn select_prefers_max_value() {
        let obj = AspectProposal {
            aspect: Aspect::Objective,
            candidate: 1,
            value: 1.2,
        };
        let c1 = AspectProposal {
            aspect: Aspect::Constraint(0),
            candidate: 2,
            value: 0.8,
        };
        assert_eq!(select_aspect(&[obj, c1]).aspect, Aspect::Objective);

        let c2 = AspectProposal {
            aspect: Aspect::Constraint(1),
            candidate: 5,
            value: 2.0,
        };
        assert_eq!(
            select_aspect(&[
                AspectProposal {
                    aspect: Aspect::Objective,
                    candidate: 1,
                    value: 1.0
                },
                c1,
                c2
            ])
            .aspect,
            Aspect::Constraint(1)
        );
    }

    #[test]
    fn select_tie_goes_to_objective() {
        let obj = AspectProposal {
            aspect: Aspect::Objective,
            candidate: 0,
            value: 1.0,
        };
        let c = AspectProposal {
            aspect: Aspect::Constraint(0),
            candidate: 1,
            value: 1.0,
        };
        assert_eq!(select_aspect(&[obj, c]).aspect, Aspect::Objective);
    }

    #[test]
    fn select_invariant_under_common_rescaling() {
        let mk = |values: [f64; 3]| {
            vec![
                AspectProposal {
                    aspect: Aspect::Objective,
                    candidate: 0,
                    value: values[0],
                },
                AspectProposal {
                    aspect: Aspect::Constraint(0),
                    candidate: 1,
                    value: values[1],
                },
                AspectProposal {
                    aspect: Aspect::Constraint(1),
                    candidate: 2,
                    value: values[2],
                },
            ]
        };
        for scale in [0.5, 1.0, 3.25, 100.0] {
            let base = select_aspect(&mk([0.4, 0.9, 0.7]));
            let scaled = select_aspect(&mk([0.4 * scale, 0.9 * scale, 0.7 * scale]));
            assert_eq!(base.aspect, scaled.aspect);
            assert_eq!(base.candidate, scaled.candidate);
        }
    }

    #[test]
    fn cei_at_incumbent_mean_is_standard_normal_density() {
        // EI with mean == best and sigma = 1 is phi(0); PoF forced to 1
        let obj = PosteriorTable {
            mean: vec![2.0, -5.0],
            std_dev: vec![1.0, 0.1],
            iteration: 1,
        };
        let c = PosteriorTable {
            mean: vec![100.0, 100.0],
            std_dev: vec![1.0, 1.0],
            iteration: 1,
        };
        let (idx, val) = cei_select(&obj, &[&c], &[0.0], Some(2.0));
        assert_eq!(idx, 0);
        assert!((val - 0.3989422804014327).abs() < 1e-9);
    }

    #[test]
    fn cei_no_improvement_mass_when_variance_vanishes() {
        let obj = PosteriorTable {
            mean: vec![1.0],
            std_dev: vec![1e-15],
            iteration: 1,
        };
        let c = PosteriorTable {
            mean: vec![100.0],
            std_dev: vec![1.0],
            iteration: 1,
        };
        let (_, val) = cei_select(&obj, &[&c], &[0.0], Some(2.0));
        assert_eq!(val, 0.0);
    }

    #[test]
    fn cei_falls_back_to_feasibility_maximization() {
        let m = 20;
        let mut cmean = vec![0.0; m];
        cmean[12] = 3.0; // clearly the most feasible point
        let obj = PosteriorTable {
            mean: vec![0.0; m],
            std_dev: vec![1.0; m],
            iteration: 1,
        };
        let c = PosteriorTable {
            mean: cmean,
            std_dev: vec![1.0; m],
            iteration: 1,
        };
        let (idx, _) = cei_select(&obj, &[&c], &[0.0], None);
        assert_eq!(idx, 12);
    }
}
