//! Property tests for the spec'd invariants.

use std::sync::Arc;

use proptest::prelude::*;

use cobalt::acquisition::{select_aspect, Aspect, AspectProposal};
use cobalt::bounds::{BoundsPair, BoundsTable};
use cobalt::grid::CandidateGrid;
use cobalt::kernel::{gram, Kernel, KernelFamily};
use cobalt::linalg::CholeskyFactor;
use cobalt::regions::partition_constraint;
use cobalt::surrogate::Surrogate;
use cobalt::tasks::{simple_regret_curve, Regret, Reward};

fn kernel_strategy() -> impl Strategy<Value = Kernel> {
    (
        prop_oneof![
            Just(KernelFamily::SquaredExponential),
            Just(KernelFamily::Matern52)
        ],
        0.2f64..3.0,
        0.2f64..4.0,
    )
        .prop_map(|(family, ell, scale)| Kernel::new(family, vec![ell], scale).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_is_symmetric_and_psd(
        kernel in kernel_strategy(),
        xs in proptest::collection::vec(-5.0f64..5.0, 2..10),
    ) {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let m = gram(&kernel, &pts, &pts).unwrap();
        for i in 0..pts.len() {
            prop_assert_eq!(m.get(i, i), kernel.outputscale);
            for j in 0..pts.len() {
                prop_assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
        // PSD: factorizable within the jitter policy
        prop_assert!(CholeskyFactor::factor(&m, "psd").is_ok());
    }

    #[test]
    fn posterior_variance_shrinks_monotonically(
        kernel in kernel_strategy(),
        raw_obs in proptest::collection::vec((0usize..40, -2.0f64..2.0), 1..12),
        noise in 0.01f64..0.5,
    ) {
        let grid = Arc::new(CandidateGrid::linspace_1d(-1.0, 1.0, 40));
        let mut s = Surrogate::new("f", kernel.clone(), noise, false, grid.clone()).unwrap();
        let mut prev = s.posterior_std().std_dev;
        prop_assert!(prev.iter().all(|&sd| sd * sd <= kernel.outputscale + 1e-12));
        for (i, v) in raw_obs {
            s.observe(i, v).unwrap();
            let cur = s.posterior_std().std_dev;
            for x in 0..grid.len() {
                prop_assert!(cur[x] <= prev[x] + 1e-10, "variance rose at {}", x);
                prop_assert!(cur[x] * cur[x] <= kernel.outputscale + 1e-12);
            }
            prev = cur;
        }
    }

    #[test]
    fn monotone_intersection_never_widens(
        raw1 in proptest::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 8),
        raw2 in proptest::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 8),
    ) {
        let mk = |spec: &[(f64, f64)]| BoundsPair {
            ucb: spec.iter().map(|(c, w)| c + w).collect(),
            lcb: spec.iter().map(|(c, w)| c - w).collect(),
        };
        let t0 = BoundsTable::unbounded(8);
        let t1 = t0.intersect(&mk(&raw1));
        let t2 = t1.intersect(&mk(&raw2));
        for i in 0..8 {
            prop_assert!(t2.ucb[i] <= t1.ucb[i] + 1e-15 || t2.crossings > t1.crossings);
            prop_assert!(t2.lcb[i] <= t2.ucb[i]);
            prop_assert!(t2.width(i) <= t1.width(i) + 1e-15);
        }
    }

    #[test]
    fn partition_is_disjoint_cover_of_grid(
        bounds in proptest::collection::vec((-2.0f64..2.0, 0.0f64..1.5), 1..50),
        threshold in -1.0f64..1.0,
    ) {
        let table = BoundsTable {
            ucb: bounds.iter().map(|(c, w)| c + w).collect(),
            lcb: bounds.iter().map(|(c, w)| c - w).collect(),
            iteration: 1,
            crossings: 0,
        };
        let p = partition_constraint(&table, threshold);
        let mut seen = vec![0u8; bounds.len()];
        for &i in p.superlevel.iter().chain(&p.sublevel).chain(&p.undecided) {
            seen[i] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for &i in &p.superlevel {
            prop_assert!(table.lcb[i] > threshold);
        }
        for &i in &p.sublevel {
            prop_assert!(table.ucb[i] < threshold);
        }
        for &i in &p.undecided {
            prop_assert!(table.ucb[i] >= threshold && table.lcb[i] <= threshold);
        }
    }

    #[test]
    fn aspect_selection_invariant_under_scaling(
        values in proptest::collection::vec(0.0f64..10.0, 1..6),
        scale in 0.01f64..100.0,
    ) {
        let mk = |vs: &[f64]| -> Vec<AspectProposal> {
            vs.iter()
                .enumerate()
                .map(|(i, &v)| AspectProposal {
                    aspect: if i == 0 { Aspect::Objective } else { Aspect::Constraint(i - 1) },
                    candidate: i,
                    value: v,
                })
                .collect()
        };
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let a = select_aspect(&mk(&values));
        let b = select_aspect(&mk(&scaled));
        prop_assert_eq!(a.aspect, b.aspect);
        prop_assert_eq!(a.candidate, b.candidate);
    }

    #[test]
    fn regret_curve_non_increasing_and_sentinel_prefix(
        rewards in proptest::collection::vec(
            prop_oneof![
                Just(Reward::Infeasible),
                (-10.0f64..0.0).prop_map(Reward::Feasible)
            ],
            1..60
        ),
    ) {
        let curve = simple_regret_curve(&rewards, 0.0);
        let mut seen_finite = false;
        let mut prev = f64::INFINITY;
        for r in curve {
            match r {
                Regret::Infinite => prop_assert!(!seen_finite, "sentinel after a feasible query"),
                Regret::Value(v) => {
                    seen_finite = true;
                    prop_assert!(v <= prev);
                    prop_assert!(v >= 0.0);
                    prev = v;
                }
            }
        }
    }
}
