//! Random polynomials with regularly varying coefficient profiles.
//!
//! The crate samples polynomials `P_n(z) = sum b(k) xi_k z^k` with
//! `b(k) = k^alpha l(k)`, finds their complex zeros, maps them into local
//! scaling windows, and compares empirical zero statistics with exact
//! finite-n formulas and their limits.
//!
//! Modules, bottom-up:
//! - [`profiles`]: coefficient profiles, power sums, phase classification
//! - [`specfun`]: Lambert `W_{-1}`, `Phi_beta`, erf/erfc, `I_0`, quadrature
//! - [`ensembles`]: coefficient laws, seeded samplers, Haar unitaries
//! - [`roots`]: Aberth-Ehrlich, companion fallback, argument principle
//! - [`scaling`]: radii `r_n`, normalizers `c_n`, window maps
//! - [`theory`]: covariances, intensities, annulus laws, self-inversive fractions
//! - [`mc`]: parallel deterministic Monte Carlo experiments
//! - [`cli`]: the `rpz` command-line front end

// `!(a < b)` is used on purpose so that NaN inputs are rejected; constants
// keep the digits of their mpmath or tabulated sources.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod ensembles;
pub mod mc;
pub mod profiles;
pub mod roots;
pub mod scaling;
pub mod specfun;
pub mod theory;

mod sum;

pub use num_complex::Complex64;

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A log-space quantity does not fit into an f64 after exponentiation.
    #[error("magnitude out of range: log-magnitude {0}")]
    MagnitudeOutOfRange(f64),
    /// A Lambert-W based window needs a larger degree.
    #[error("degree too small for this phase: n = {n}, smallest valid degree found by doubling scan is {min_n}")]
    DegreeTooSmall { n: usize, min_n: usize },
    /// An iterative method failed to converge or lost accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::DegreeTooSmall { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
