//! Robust graph-filter identification with graph-shift-operator denoising.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: shift operators, random graph models, perturbations, filters,
//!   synthetic signals, error metrics and CSV I/O.
//! - [`solver`]: the non-robust closed form, the alternating solver with
//!   majorization-minimization reweighting, its stationarity-penalized variant,
//!   coefficient recovery and the identifiability check.
//! - [`joint`]: joint identification of several filters on one graph and the
//!   autoregressive time-series variant.
//! - [`efficient`]: the reduced-complexity solver (gradient filter step and
//!   cyclic coordinate descent on the graph).
//! - [`experiments`]: config-driven experiment harness, station-data ingestion
//!   and forecasting.
//!
//! Matrices are dense `faer::Mat<f64>`; `vec(·)` is column-major everywhere.

pub mod efficient;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod joint;
pub mod linalg;
pub mod solver;

pub use error::{Error, Result};
pub use faer::{Mat, MatRef};
