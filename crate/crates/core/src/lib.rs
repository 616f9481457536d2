//! Deterministic, monotone and isometry-equivariant splitting of Poisson point
//! processes, together with the equivariant "thickening" homomorphism and a
//! statistical harness for checking them.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, balls, shells, boxes, isometries, QR.
//! * [`randomness`]: reproduction functions, addition mod 1, inverse
//!   transforms, subset unranking and the uniform-to-Poisson coupling.
//! * [`coupling`]: the coupling matrix of two Poisson counts and the split
//!   function built from it.
//! * [`point_process`]: point sets, restriction, orderings, file formats.
//! * [`selection`]: pre-seeds, seeds and globes.
//! * [`assignment`]: tags, partners, ranks and the assignment of uniforms.
//! * [`factor`]: the splitting maps and the homomorphisms.
//! * [`verification`]: goodness-of-fit tests, equivariance checks and the
//!   finitary radius estimator.
//! * [`config`]: JSON run configuration.
//! * [`cli`]: the `splitfactor` command line.

pub mod assignment;
pub mod cli;
pub mod config;
pub mod coupling;
pub mod error;
pub mod factor;
pub mod geometry;
pub mod point_process;
pub mod randomness;
pub mod selection;
pub mod spatial;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{Ball, Cuboid, Isometry, Point};
pub use point_process::PointSet;
pub use randomness::UnitValue;
