//! Least-squares estimation and robust inference for periodic vector
//! autoregressions driven by uncorrelated but possibly dependent noise.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod infer;
pub mod io;
pub mod linalg;
pub mod lrv;
pub mod mc;
pub mod model;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use model::{PeriodicSeries, PvarModel};
