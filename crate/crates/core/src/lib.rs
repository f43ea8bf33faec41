//! Simultaneous confidence bands (SCBs) for moment-based statistics of
//! functional data.
//!
//! Every statistic handled here is a smooth function `H` of pointwise
//! non-centered sample moments (mean, variance, Cohen's d, skewness,
//! excess kurtosis and their normalizing transforms). Linearizing `H`
//! around the estimated moments turns the raw moment residuals into
//! *functional delta residuals*; their empirical covariance estimates the
//! limiting covariance of the estimator, and they drive the multiplier
//! bootstrap and Gaussian kinematic formula estimates of the band quantile.
//!
//! Layout:
//!
//! - [`fdata`]: grids, curve samples and CSV I/O
//! - [`simmodels`]: the simulation models A, B, C, Gaussian-process sampling
//!   and the modified Bessel function `K_nu`
//! - [`moments`]: pointwise moments, moment residuals, cross-covariances
//! - [`transforms`]: the statistic registry and delta residuals
//! - [`quantile`]: multiplier bootstrap and GKF quantiles
//! - [`scb`]: band assembly, coverage checks and Gaussianity tests
//! - [`harness`]: Monte Carlo coverage experiments
//! - [`verify`]: independent numerical oracles

pub mod error;
pub mod fdata;
pub mod harness;
pub mod moments;
pub mod quantile;
pub mod rng;
pub mod scb;
pub mod simmodels;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use fdata::{Curve, FunctionalSample, Grid};
