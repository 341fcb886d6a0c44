//! Level-set partitions per constraint and region-of-interest construction.
//!
//! For constraint `k` with threshold `h_k`, the grid splits into the
//! superlevel set `S_k` (confidently feasible: `lcb > h`), the sublevel set
//! `L_k` (confidently infeasible: `ucb < h`) and the undecided set `U_k`
//! (the interval straddles the threshold). The region of interest per
//! constraint is `S_k ∪ U_k`; the objective's region keeps every point whose
//! upper bound reaches the best confidently-feasible lower bound on the
//! objective; the combined region is their intersection.

use crate::bounds::BoundsTable;

/// Index sets of one constraint's level-set partition. Sets are sorted and
/// pairwise disjoint; their union is the whole grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintPartition {
    pub superlevel: Vec<usize>,
    pub sublevel: Vec<usize>,
    pub undecided: Vec<usize>,
}

/// Partition the grid for one constraint.
///
/// Ties follow the closed/open conventions: `S = {lcb > h}`, `L = {ucb < h}`,
/// `U = {ucb >= h and lcb <= h}`, so a point with `lcb = ucb = h` is
/// undecided.
pub fn partition_constraint(bounds: &BoundsTable, threshold: f64) -> ConstraintPartition {
    let mut part = ConstraintPartition {
        superlevel: Vec::new(),
        sublevel: Vec::new(),
        undecided: Vec::new(),
    };
    for i in 0..bounds.ucb.len() {
        if bounds.lcb[i] > threshold {
            part.superlevel.push(i);
        } else if bounds.ucb[i] < threshold {
            part.sublevel.push(i);
        } else {
            part.undecided.push(i);
        }
    }
    part
}

/// Best confidently-feasible objective lower bound: max of `lcb_f` over the
/// joint superlevel set, `-inf` when that set is empty.
pub fn objective_threshold(objective_bounds: &BoundsTable, joint_superlevel: &[usize]) -> f64 {
    joint_superlevel
        .iter()
        .map(|&i| objective_bounds.lcb[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Regions of interest at one iteration.
#[derive(Debug, Clone)]
pub struct RegionPartition {
    pub constraints: Vec<ConstraintPartition>,
    /// Intersection of all constraint superlevel sets.
    pub joint_superlevel: Vec<usize>,
    /// Running maximum of the objective threshold (`-inf` until some point
    /// is confidently feasible for every constraint).
    pub lcb_f_max: f64,
    /// `{ ucb_f >= lcb_f_max }`; the whole grid while the threshold is -inf.
    pub roi_objective: Vec<usize>,
    /// Intersection over constraints of `S_k ∪ U_k`.
    pub roi_constraints: Vec<usize>,
    /// `roi_objective ∩ roi_constraints` before any fallback.
    pub roi_combined_raw: Vec<usize>,
    /// The set the optimizer actually searches, after the empty-set fallback.
    pub roi_combined: Vec<usize>,
    /// 1 if the combined region was empty and fell back to the constraint
    /// region, 2 if it fell back all the way to the full grid.
    pub fallback_level: u8,
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Build all regions for one iteration.
///
/// `previous_lcb_f_max` keeps the objective threshold non-decreasing across
/// iterations; pass `-inf` on the first call. When the combined region is
/// empty it falls back to the constraint region, then to the full grid, so
/// the optimizer always has a nonempty domain; the fallback level is
/// recorded for diagnostics.
pub fn build_rois(
    objective_bounds: &BoundsTable,
    constraint_bounds: &[&BoundsTable],
    thresholds: &[f64],
    previous_lcb_f_max: f64,
) -> RegionPartition {
    assert_eq!(constraint_bounds.len(), thresholds.len());
    let grid_size = objective_bounds.ucb.len();
    let all: Vec<usize> = (0..grid_size).collect();

    let constraints: Vec<ConstraintPartition> = constraint_bounds
        .iter()
        .zip(thresholds)
        .map(|(b, &h)| partition_constraint(b, h))
        .collect();

    let mut joint_superlevel = all.clone();
    for part in &constraints {
        joint_superlevel = intersect_sorted(&joint_superlevel, &part.superlevel);
    }

    let fresh = objective_threshold(objective_bounds, &joint_superlevel);
    let lcb_f_max = fresh.max(previous_lcb_f_max);

    let roi_objective: Vec<usize> = if lcb_f_max == f64::NEG_INFINITY {
        all.clone()
    } else {
        (0..grid_size)
            .filter(|&i| objective_bounds.ucb[i] >= lcb_f_max)
            .collect()
    };

    let mut roi_constraints = all;
    for part in &constraints {
        // S_k ∪ U_k, merged in sorted order
        let mut roi_k: Vec<usize> =
            Vec::with_capacity(part.superlevel.len() + part.undecided.len());
        let mut i = 0;
        let mut j = 0;
        while i < part.superlevel.len() || j < part.undecided.len() {
            let take_s = j >= part.undecided.len()
                || (i < part.superlevel.len() && part.superlevel[i] < part.undecided[j]);
            if take_s {
                roi_k.push(part.superlevel[i]);
                i += 1;
            } else {
                roi_k.push(part.undecided[j]);
                j += 1;
            }
        }
        roi_constraints = intersect_sorted(&roi_constraints, &roi_k);
    }

    let roi_combined_raw = intersect_sorted(&roi_objective, &roi_constraints);
    let (roi_combined, fallback_level) = if !roi_combined_raw.is_empty() {
        (roi_combined_raw.clone(), 0)
    } else if !roi_constraints.is_empty() {
        (roi_constraints.clone(), 1)
    } else {
        ((0..grid_size).collect(), 2)
    };

    RegionPartition {
        constraints,
        joint_superlevel,
        lcb_f_max,
        roi_objective,
        roi_constraints,
        roi_combined_raw,
        roi_combined,
        fallback_level,
    }
}
