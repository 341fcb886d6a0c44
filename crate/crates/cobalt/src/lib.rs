//! Constrained Bayesian optimization over finite candidate grids.
//!
//! The optimizer maintains one Gaussian process per unknown function (the
//! objective and each constraint), derives upper/lower confidence bounds on a
//! finite candidate grid, partitions the grid into confidently-feasible,
//! confidently-infeasible and undecided sets per constraint, and intersects
//! per-function regions of interest to shrink the search space. Each
//! iteration, one acquisition proposal per aspect (objective or a single
//! constraint) competes for the next query, trading off objective
//! optimization against active learning of the constraint boundaries.
//!
//! The crate is organized as:
//!
//! * [`kernel`], [`gp`], [`surrogate`] — exact GP regression: kernels and
//!   Gram matrices, posterior mean/variance on a grid, log marginal
//!   likelihood, prior sampling, and an incrementally-updated surrogate
//!   state with hyperparameter fitting.
//! * [`bounds`] — the confidence multiplier schedule and monotone
//!   (intersected) confidence bounds.
//! * [`regions`] — level-set partitions and region-of-interest construction.
//! * [`acquisition`] — per-aspect acquisition proposals, the cross-aspect
//!   selection rule, and the cEI baseline acquisition.
//! * [`optimizer`] — the coupled and decoupled optimization loops.
//! * [`tasks`] — benchmark task definitions, rewards and simple regret.
//!
//! All randomness is driven by explicit seeds; runs are deterministic.

pub mod acquisition;
pub mod bounds;
pub mod gp;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod optimizer;
pub mod regions;
pub mod rng;
pub mod sobol;
pub mod surrogate;
pub mod tasks;

pub use acquisition::{Aspect, AspectProposal, ObjectiveAcqForm};
pub use bounds::{BetaMode, BetaSchedule, BoundsPair, BoundsTable, PiRule};
pub use gp::{ObservationSet, PosteriorTable, PriorSampler};
pub use grid::CandidateGrid;
pub use kernel::{Kernel, KernelFamily};
pub use optimizer::{EvalMode, IterationView, OptimizerConfig, TrialRecord, TrialRow};
pub use regions::RegionPartition;
pub use surrogate::{FitOutcome, FitSpec, Surrogate};
pub use tasks::{Regret, Reward, TaskDefinition};

/// Library error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller violated an operation's preconditions.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A covariance factorization failed even after jitter escalation.
    #[error("numerical degeneracy in GP for `{function}`: {detail}")]
    Degeneracy { function: String, detail: String },
    /// A task registry lookup failed.
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    /// A trial aborted mid-run; the partial record is preserved.
    #[error("trial aborted at iteration {at}: {source}")]
    TrialAborted {
        at: usize,
        partial: Box<optimizer::TrialRecord>,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
