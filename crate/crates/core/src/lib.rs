//! Calibration of acoustic sensor arrays against a known camera network from
//! direction-of-arrival observations.

pub mod calib;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod observations;
pub mod ransac;
pub mod rbt;
pub mod sim;

pub use error::{Error, Result};
