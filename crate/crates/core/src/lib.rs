//! Stochastic fiber lay-down on a moving conveyor belt.
//!
//! The deposition point of a fiber follows a two-dimensional
//! Ornstein-Uhlenbeck process whose centre moves with the belt. This crate
//!
//! - simulates sample paths ([`model`]),
//! - measures occupation times of rectangles, the stand-in for deposited
//!   mass per area ([`occupation`]),
//! - evaluates expected occupation times exactly ([`analytic`]) and by
//!   Monte-Carlo ([`montecarlo`]),
//! - recovers `(lambda, sigma1, sigma2)` from observed occupation times by
//!   least squares ([`estimator`]).
//!
//! ```
//! use fiberlay::{expected_occupation, BeltConfig, ModelParams, QuadratureConfig, Rect};
//!
//! let params = ModelParams::new(1.0, 1.0, 1.0)?;
//! let belt = BeltConfig::new(1.0)?;
//! let region = Rect::new(3.0, 15.0, -1.0, 1.0)?;
//! let e = expected_occupation(&params, &belt, &region, 7.0, &QuadratureConfig::default())?;
//! assert!((e - 2.5484).abs() < 1e-4);
//! # Ok::<(), fiberlay::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a > b)` also rejects NaN

pub mod analytic;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod occupation;
pub mod optimize;
pub mod quadrature;
pub mod special;

pub use analytic::{expected_occupation, grid_expected_occupation, occupancy_integrand};
pub use error::{Error, Result};
pub use estimator::{cost, estimate_params, EstimationResult, ObservationSet, OptimizerConfig};
pub use model::{
    ou_mean_sd, simulate_path, BeltConfig, FiberPath, ModelParams, OuMoments, Rect, TimeGrid,
    DEFAULT_STEP,
};
pub use montecarlo::{
    mc_expected_occupation, mc_expected_occupations, mc_observation_matrix, McConfig, McEstimate,
};
pub use occupation::{
    grid_occupation, occupation_time, occupation_time_polyline, occupation_time_sampled,
    strip_profile, OccupationGrid, OccupationRule,
};
pub use optimize::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use quadrature::QuadratureConfig;
