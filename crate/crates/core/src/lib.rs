//! Jump-robust integrated-volatility estimation with data-driven threshold
//! tuning.
//!
//! The crate has four layers:
//!
//! * [`grid`] / [`estimators`] — increment series and the non-iterative
//!   estimators (RV, BV, multipowers, truncated variation, spot kernels,
//!   truncated quarticity, feasible confidence intervals);
//! * [`fixedpoint`] — the uniform and localized fixed-point threshold
//!   iterations with stabilization detection;
//! * [`simulate`] / [`oracle`] — the semimartingale simulation engine
//!   (Heston variance, CGMY and compound-Poisson jumps, benchmark model
//!   presets) and the ground-truth oracle checks built on it;
//! * [`harness`] — the Monte Carlo benchmark runner, metrics, table
//!   emission, and tick-CSV ingestion behind the `voltune` CLI.
//!
//! Estimation code is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the
//! simulator and harness use.

pub mod error;
pub mod estimators;
pub mod fixedpoint;
pub mod grid;
pub mod harness;
pub mod numeric;
pub mod oracle;
pub mod real;
pub mod simulate;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` aliases for the generic core types.
pub type Grid = grid::SamplingGrid<f64>;
pub type Increments = grid::IncrementSeries<f64>;
pub type Bundle = grid::PathBundle<f64>;
pub type Threshold = estimators::ThresholdSpec<f64>;
pub type Initializer = estimators::InitializerSpec<f64>;
pub type Trace = fixedpoint::FixedPointTrace<f64>;
pub type SpotTrace = fixedpoint::LocalTrace<f64>;
pub type OracleCfg = oracle::OracleConfig<f64>;
