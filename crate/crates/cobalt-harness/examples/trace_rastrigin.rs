//! Diagnostic trace of one Rastrigin trial: threshold evolution, membership
//! of key points, and constraint-bound sanity at the optimum.

use cobalt::optimizer::{run_with_observer, OptimizerConfig};
use cobalt::tasks;

fn main() {
    let task = tasks::rastrigin_1d_1c(60).unwrap();
    let (opt_idx, opt_val) = task.true_optimum;
    println!("optimum idx={opt_idx} f*={opt_val:.4} threshold={}", task.thresholds[0]);
    let config = OptimizerConfig {
        budget: 2000,
        init_design_size: 10,
        seed: 3,
        ..OptimizerConfig::default()
    };
    let mut last_print = 0usize;
    run_with_observer(&task, &config, |view| {
        let t = view.t;
        let should = t <= 5 || t % 100 == 0 || (view.regions.lcb_f_max > opt_val && last_print + 50 < t);
        if should {
            last_print = t;
            let r = view.regions;
            let in_roi = r.roi_combined_raw.binary_search(&opt_idx).is_ok();
            let in_sjoint = r.joint_superlevel.binary_search(&opt_idx).is_ok();
            // who achieves lcb_f_max in S_joint?
            let mut argmax = usize::MAX;
            let mut best = f64::NEG_INFINITY;
            for &i in &r.joint_superlevel {
                if view.bounds_objective.lcb[i] > best {
                    best = view.bounds_objective.lcb[i];
                    argmax = i;
                }
            }
            let (cval, fval) = if argmax != usize::MAX {
                (task.constraint_value(0, argmax), task.objective_value(argmax))
            } else {
                (f64::NAN, f64::NAN)
            };
            println!(
                "t={t:4} lcbmax={:+.3} (fresh argmax {} true_f={fval:+.3} true_c={cval:.3}) |S|={} |ROI|={} x*inROI={in_roi} x*inS={in_sjoint} sel={} val={:.3} beta={:.1}",
                r.lcb_f_max,
                argmax as i64,
                r.joint_superlevel.len(),
                r.roi_combined_raw.len(),
                view.selected.aspect,
                view.selected.value,
                view.beta,
            );
        }
    })
    .unwrap();
}
