//! Transfer-matrix circuit simulation and inverse design of narrowband
//! bandpass frequency-selective surfaces built from miniaturized ring /
//! wire-grid unit cells.
//!
//! The circuit maths is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the fitting, IO and CLI
//! layers use.

// `!(x > 0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod error;
pub mod export;
pub mod fit;
pub mod fss;
pub mod metrics;
pub mod network;
pub mod response;
pub mod runner;
pub mod scalar;
pub mod synthesis;
pub mod touchstone;

pub use error::{BandSide, Error, Result};
pub use network::{Polarization, ETA0, SPEED_OF_LIGHT};
pub use scalar::Real;

pub type TwoPortMatrix = network::TwoPort<f64>;
pub type SMatrix = network::SParams<f64>;
pub type IncidenceCondition = network::Incidence<f64>;
pub type GeometryParams = fss::Geometry<f64>;
pub type CalibrationConstants = fss::Calibration<f64>;
pub type CircuitParams = fss::Circuit<f64>;
pub type LayeredNetwork = fss::Ladder<f64>;
pub type FrequencyGrid = response::Grid<f64>;
pub type ResponseCurve = response::Response<f64>;
pub type PassbandMetrics = metrics::Metrics<f64>;
pub type DesignSpec = synthesis::Design<f64>;
