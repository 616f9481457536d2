//! Test harness: goodness-of-fit reports, equivariance checks, the finitary
//! radius estimator and the Monte Carlo suites built on them.

pub mod equivariance;
pub mod finitary;
pub mod stats;
pub mod suites;

pub use equivariance::{bottleneck_distance, equivariance_report, MapKind};
pub use finitary::{finitary_radius, finitary_study, FinitaryEstimate, FinitarySample};
pub use stats::{gof_poisson_counts, ks_uniform, TestReport};
pub use suites::{run_suite, Suite};
