//! Randomized midpoint tests, theorem suites, boundary falsification and
//! the closed-form counterexamples.

mod exec;
mod falsify;
mod majorization;
mod midpoint;
mod passage;
mod remark;
mod report;
mod suites;

pub use exec::Executor;
pub use falsify::{boundary_control, falsify_boundary, in_concavity_region, FalsifyConfig, FalsifyReport, SEARCH_BLOCK};
pub use majorization::{weak_majorization, weak_majorization_tol};
pub use midpoint::{
    evaluate_sample, run_midpoint, search_midpoint, trial_rng, ConcavityReport, Direction, Functional, MatrixSampler,
    MidpointTrial, MidpointValues, Sample, Sampler, Witness,
};
pub use passage::{mean_root_map, passage_check, MatrixMap, PassageReport, CONCAVE_BATTERY, CONVEX_BATTERY, PASSAGE_TOL};
pub use remark::{compression_counterexample, CompressionCounterexample, DIRECT_TOL};
pub use report::{PointReport, RunHeader, SuiteReport};
pub use suites::{
    missing_region_points, pick_samples, point_seed, run_points, run_suite, Form, GridPoint, RunSettings, SuiteSpec,
    TheoremId,
};
