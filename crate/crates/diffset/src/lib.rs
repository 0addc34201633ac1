//! Confidence-guided differential-set selection.
//!
//! Given observations of a binary class and a roster of discrete variables,
//! this crate finds a small variable subset that explains the class by
//! greedily minimizing the class's conditional entropy, ranking every
//! candidate step by a one-sided confidence score computed from subsampled
//! entropy estimates. Uncertain data can then stop the selection before
//! spurious variables creep in.
//!
//! The pieces:
//!
//! - [`dataset`]: observed samples, delimited-file ingestion, projections.
//! - [`distribution`]: explicit joint probability tables with exact
//!   conditional entropies and inverse-CDF sampling, plus the built-in
//!   case-study table.
//! - [`estimator`]: conditional entropy and its standard deviation from a
//!   finite sample via half-size subsampling with Miller-Madow corrected
//!   per-cell entropies.
//! - [`selection`]: the iterative procedure scored by confidence-bound
//!   intersections.
//! - [`oracle`]: exhaustive subset evaluation for differential testing.
//! - [`montecarlo`]: a replicated-experiment harness with deterministic
//!   seeding and exact aggregation.
//!
//! Everything is deterministic given the configured seeds; see [`rng`] for
//! the generator and seed-derivation scheme.

pub mod dataset;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod selection;

pub use dataset::{Dataset, DatasetFingerprint, DatasetView, VariableId};
pub use distribution::{binary_entropy, CellStats, JointDistribution};
pub use error::{Error, Result};
pub use estimator::{
    binary_entropy_mm, conditional_entropy_once, estimate, Correction, EntropyEstimate,
    EstimatorConfig,
};
pub use montecarlo::{
    compare_reports, run_experiment, ExperimentPlan, Progress, ReportDivergence, SimulationReport,
};
pub use oracle::{
    exhaustive_empirical, exhaustive_exact, minimal_minimizers, EvaluationSource, SubsetEvaluation,
};
pub use selection::{
    cantelli_confidence, score_extension, score_first, select, CandidateScore, SelectionConfig,
    SelectionStep, SelectionTrace, Termination, SCORE_CAP,
};
