//! `Phi_beta(u) = int_0^1 x^beta e^{u x} dx` for `beta > -1` and complex `u`.
//!
//! Three regimes:
//! - `Re u <= 0`: direct quadrature;
//! - `0 < Re u <= 700`: quadrature of the scaled integrand `x^beta e^{u(x-1)}`,
//!   so `log Phi` is available without overflow;
//! - `Re u > 700`: endpoint expansion `e^u/u (1 - beta/u + beta(beta-1)/u^2)`.
//!
//! For `beta < 0` the singular part `1/(beta+1)` is split off analytically
//! and the remainder `x^beta (e^{ux} - 1)` is bounded at the origin.

use num_complex::Complex64;

use super::quad::{integrate, QuadratureConfig};
use crate::{Error, Result};

const ASYMPTOTIC_RE: f64 = 700.0;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Phi_beta needs beta > -1, got {beta}"
        )));
    }
    Ok(())
}

/// `e^z - 1` without cancellation for small `|z|`.
fn expm1_c(z: Complex64) -> Complex64 {
    let half_sin = (0.5 * z.im).sin();
    let cos_m1 = -2.0 * half_sin * half_sin;
    let ea = z.re.exp();
    Complex64::new(z.re.exp_m1() * z.im.cos() + cos_m1, ea * z.im.sin())
}

fn finish(beta: f64, u: Complex64, q: super::quad::Quadrature) -> Result<Complex64> {
    if !q.converged || !q.value.re.is_finite() || !q.value.im.is_finite() {
        return Err(Error::Numerical(format!(
            "Phi_{beta}({u}) quadrature did not converge (error estimate {:e})",
            q.abs_err
        )));
    }
    Ok(q.value)
}

fn phi_direct(beta: f64, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if beta >= 0.0 {
        let q = integrate(|x| (u * x).exp() * x.powf(beta), 0.0, 1.0, cfg);
        finish(beta, u, q)
    } else {
        let q = integrate(|x| expm1_c(u * x) * x.powf(beta), 0.0, 1.0, cfg);
        Ok(finish(beta, u, q)? + 1.0 / (beta + 1.0))
    }
}

/// `e^{-u} Phi_beta(u)`, intended for `Re u > 0`.
fn phi_scaled_quad(beta: f64, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if beta >= 0.0 {
        let q = integrate(|x| (u * (x - 1.0)).exp() * x.powf(beta), 0.0, 1.0, cfg);
        finish(beta, u, q)
    } else {
        let q = integrate(
            |x| -(u * (x - 1.0)).exp() * expm1_c(-u * x) * x.powf(beta),
            0.0,
            1.0,
            cfg,
        );
        Ok(finish(beta, u, q)? + (-u).exp() / (beta + 1.0))
    }
}

fn log_phi_asymptotic(beta: f64, u: Complex64) -> Complex64 {
    let inv = 1.0 / u;
    let series = 1.0 - beta * inv + beta * (beta - 1.0) * inv * inv;
    u - u.ln() + series.ln()
}

/// `Phi_beta(u)` with explicit quadrature tolerances.
pub fn phi_with(beta: f64, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    check_beta(beta)?;
    cfg.validate()?;
    if u.re > ASYMPTOTIC_RE {
        let l = log_phi_asymptotic(beta, u);
        if l.re > 709.0 {
            return Err(Error::MagnitudeOutOfRange(l.re));
        }
        return Ok(l.exp());
    }
    if u.re > 0.0 {
        return Ok(phi_scaled_quad(beta, u, cfg)? * u.exp());
    }
    phi_direct(beta, u, cfg)
}

/// `Phi_beta(u)` with default tolerances.
pub fn phi(beta: f64, u: Complex64) -> Result<Complex64> {
    phi_with(beta, u, &QuadratureConfig::default())
}

/// Principal logarithm of `Phi_beta(u)`, finite for any `Re u`.
pub fn log_phi_with(beta: f64, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    check_beta(beta)?;
    cfg.validate()?;
    if u.re > ASYMPTOTIC_RE {
        return Ok(log_phi_asymptotic(beta, u));
    }
    if u.re > 0.0 {
        return Ok(u + phi_scaled_quad(beta, u, cfg)?.ln());
    }
    Ok(phi_direct(beta, u, cfg)?.ln())
}

pub fn log_phi(beta: f64, u: Complex64) -> Result<Complex64> {
    log_phi_with(beta, u, &QuadratureConfig::default())
}

/// `Phi_a(u) / Phi_b(u)` evaluated through the difference of logarithms.
pub fn phi_ratio_with(a: f64, b: f64, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    Ok((log_phi_with(a, u, cfg)? - log_phi_with(b, u, cfg)?).exp())
}

/// Real-argument ratio `Phi_a(x)/Phi_b(x)` with tight tolerances.
pub fn phi_ratio_real(a: f64, b: f64, x: f64) -> Result<f64> {
    Ok(phi_ratio_with(a, b, Complex64::new(x, 0.0), &QuadratureConfig::tight())?.re)
}
