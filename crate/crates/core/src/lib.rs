//! Bayesian regression with nonignorable missing responses.
//!
//! The outcome model `f(y | x; θ)` is parametric (linear regression or a
//! random-intercept linear mixed model). The response mechanism
//! `P(s = 1 | x, y)` is logistic in a penalized spline of `y` plus either a
//! linear term in covariates `z` or a Gaussian radial-basis expansion of `z`.
//! Pólya-gamma auxiliaries make every response-model coefficient block
//! conditionally Gaussian, and missing responses are imputed with a
//! Metropolis-adjusted Langevin step.
//!
//! Module map:
//!
//! - [`pg`]: Pólya-gamma variates.
//! - [`basis`]: truncated power spline and radial-basis designs, knot and center placement.
//! - [`response`]: response-mechanism state and its full-conditional updates.
//! - [`outcome`]: linear regression and linear mixed model conditionals.
//! - [`mcmc`]: chain initialization, Gibbs sweep, Langevin imputation, draw storage.
//! - [`eval`]: simulation scenarios, estimands, DIC, replication metrics.
//! - [`io`]: CSV ingestion, run configuration and result files.

pub mod basis;
pub mod data;
mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod mcmc;
pub mod outcome;
pub mod pg;
pub mod response;
pub mod stats;

pub use data::Dataset;
pub use error::{Error, Result};

/// Logistic function `1 / (1 + e^{-x})`, evaluated without overflow.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log ψ(x)` for the logistic function ψ.
#[inline]
pub fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}
