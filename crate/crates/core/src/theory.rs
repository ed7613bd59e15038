//! Deterministic predictions: GAF covariances, zero intensities, annulus
//! laws, the crossover shift and the self-inversive circle fractions.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::profiles::{CoefficientProfile, PhaseClass};
use crate::specfun::quad::integrate_real_to_infinity;
use crate::specfun::{
    bessel_i0e, erf, erfc, integrate_real, log_phi_with, phi_with, QuadratureConfig,
};
use crate::sum::KahanSum;
use crate::{invalid, Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn check_liquid(alpha: f64) -> Result<()> {
    if !(alpha > -0.5) || !alpha.is_finite() {
        return Err(Error::Domain(format!("needs alpha > -1/2, got {alpha}")));
    }
    Ok(())
}

fn quad_ok((v, err, ok): (f64, f64, bool), what: &str) -> Result<f64> {
    if !ok || !v.is_finite() {
        return Err(Error::Numerical(format!(
            "{what}: quadrature did not converge (error {err:e})"
        )));
    }
    Ok(v)
}

/// `(E[G(u1) conj G(u2)], E[G(u1) G(u2)])` for the limiting GAF at angle `psi`.
///
/// The pseudo-covariance `(s1^2 - s2^2) Phi_{2 alpha}(u1 + u2)` survives only on the real axis.
pub fn gaf_covariance(
    alpha: f64,
    sigma1: f64,
    sigma2: f64,
    psi: f64,
    u1: Complex64,
    u2: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_liquid(alpha)?;
    let cfg = QuadratureConfig::tight();
    let herm = (sigma1 * sigma1 + sigma2 * sigma2) * phi_with(2.0 * alpha, u1 + u2.conj(), &cfg)?;
    let pseudo = if on_real_axis(psi) {
        (sigma1 * sigma1 - sigma2 * sigma2) * phi_with(2.0 * alpha, u1 + u2, &cfg)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok((herm, pseudo))
}

fn on_real_axis(psi: f64) -> bool {
    let r = psi.rem_euclid(PI);
    r < 1e-12 || PI - r < 1e-12
}

/// Covariances between the limits in windows at `psi_i` and `psi_j`.
///
/// Distinct windows are uncorrelated; the pseudo-covariance is nonzero only
/// when `psi_i + psi_j` is a multiple of `2 pi` (conjugate windows).
pub fn gaf_cross_covariance(
    alpha: f64,
    sigma1: f64,
    sigma2: f64,
    psi_i: f64,
    psi_j: f64,
    u1: Complex64,
    u2: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_liquid(alpha)?;
    let cfg = QuadratureConfig::tight();
    let same = ((psi_i - psi_j).rem_euclid(2.0 * PI))
        .min(2.0 * PI - (psi_i - psi_j).rem_euclid(2.0 * PI))
        < 1e-12;
    let conj = {
        let r = (psi_i + psi_j).rem_euclid(2.0 * PI);
        r < 1e-12 || 2.0 * PI - r < 1e-12
    };
    let zero = Complex64::new(0.0, 0.0);
    let herm = if same {
        (sigma1 * sigma1 + sigma2 * sigma2) * phi_with(2.0 * alpha, u1 + u2.conj(), &cfg)?
    } else {
        zero
    };
    let pseudo = if conj {
        (sigma1 * sigma1 - sigma2 * sigma2) * phi_with(2.0 * alpha, u1 + u2, &cfg)?
    } else {
        zero
    };
    Ok((herm, pseudo))
}

/// `Phi_a(x) / Phi_{2 alpha}(x)` for real `x` through log-space quadrature.
fn moment_ratio(a: f64, two_alpha: f64, x: f64) -> Result<f64> {
    let cfg = QuadratureConfig::tight();
    let u = Complex64::new(x, 0.0);
    Ok((log_phi_with(a, u, &cfg)?.re - log_phi_with(two_alpha, u, &cfg)?.re).exp())
}

/// Intensity of zeros of the isotropic limiting GAF at `u`; depends on `Re u` only.
pub fn rho1(alpha: f64, u: Complex64) -> Result<f64> {
    check_liquid(alpha)?;
    let x = 2.0 * u.re;
    let b = 2.0 * alpha;
    let m1 = moment_ratio(b + 1.0, b, x)?;
    let m2 = moment_ratio(b + 2.0, b, x)?;
    Ok(((m2 - m1 * m1) / PI).max(0.0))
}

/// `(1 / (4 pi s^2)) (1 - (s / sinh s)^2)`, the Kac limit; series below `|s| = 0.1`.
pub fn kac_closed_form(s: f64) -> f64 {
    if s.abs() < 0.1 {
        let s2 = s * s;
        let series = 1.0 / 3.0
            + s2 * (-1.0 / 15.0 + s2 * (2.0 / 189.0 + s2 * (-1.0 / 675.0 + s2 * (2.0 / 10395.0))));
        return series / (4.0 * PI);
    }
    let q = s / s.sinh();
    (1.0 - q * q) / (4.0 * PI * s * s)
}

/// Variance of `k` under weights `b(k)^2 e^{2 k x}`, `k = 0..n`.
fn weighted_index_variance(log_b2: &[f64], x: f64) -> f64 {
    let lw: Vec<f64> = log_b2
        .iter()
        .enumerate()
        .map(|(k, l)| l + 2.0 * x * k as f64)
        .collect();
    let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut w, mut wk) = (KahanSum::new(), KahanSum::new());
    for (k, l) in lw.iter().enumerate() {
        let e = (l - top).exp();
        w.add(e);
        wk.add(e * k as f64);
    }
    let mean = wk.value() / w.value();
    let mut var = KahanSum::new();
    for (k, l) in lw.iter().enumerate() {
        let d = k as f64 - mean;
        var.add((l - top).exp() * d * d);
    }
    var.value() / w.value()
}

/// Exact finite-n radial intensity of `P_n` with Gaussian isotropic coefficients:
/// expected zeros in `{a < |z| < b}` equal `2 pi int_a^b p_n(r) dr`.
pub fn radial_intensity_finite(profile: &CoefficientProfile, n: usize, r: f64) -> Result<f64> {
    if n < 1 {
        return invalid("radial intensity needs n >= 1");
    }
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("radial intensity needs r > 0, got {r}"));
    }
    let log_b2: Vec<f64> = (0..=n).map(|k| 2.0 * profile.log_b(k)).collect();
    Ok(weighted_index_variance(&log_b2, r.ln()) / (PI * r))
}

/// `2 pi int_0^inf p_n(r) dr`, which equals the degree `n`.
pub fn radial_mass(profile: &CoefficientProfile, n: usize) -> Result<f64> {
    if n < 1 {
        return invalid("radial mass needs n >= 1");
    }
    let log_b2: Vec<f64> = (0..=n).map(|k| 2.0 * profile.log_b(k)).collect();
    let cfg = QuadratureConfig::tight();
    // In x = log r: 2 pi p_n(r) dr = 2 Var(x) dx. Pieces at x = +-10^j / n.
    let f = |x: f64| 2.0 * weighted_index_variance(&log_b2, x);
    let mut total = KahanSum::new();
    for sign in [1.0, -1.0] {
        let mut lo = 0.0;
        let mut hi = 1.0 / n as f64;
        while hi < 50.0 {
            total.add(quad_ok(
                integrate_real(|t| f(sign * t), lo, hi, &cfg),
                "radial mass",
            )?);
            lo = hi;
            hi *= 10.0;
        }
        total.add(quad_ok(
            integrate_real_to_infinity(|t| f(sign * t), lo, &cfg),
            "radial mass tail",
        )?);
    }
    Ok(total.value())
}

/// Exact expected fraction of the `n` zeros with `log_r1 < log|z| < log_r2`.
pub fn annulus_finite(
    profile: &CoefficientProfile,
    n: usize,
    log_r1: f64,
    log_r2: f64,
) -> Result<f64> {
    if n < 1 || !(log_r1 < log_r2) {
        return invalid("finite annulus needs n >= 1 and log_r1 < log_r2");
    }
    let log_b2: Vec<f64> = (0..=n).map(|k| 2.0 * profile.log_b(k)).collect();
    let v = integrate_real(
        |x| 2.0 * weighted_index_variance(&log_b2, x),
        log_r1,
        log_r2,
        &QuadratureConfig::tight(),
    );
    Ok(quad_ok(v, "finite annulus")? / n as f64)
}

/// Which limiting intensity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitSpec {
    /// `rho_1(alpha, s)`, `alpha > -1/2`.
    Liquid { alpha: f64 },
    /// The closed form at `alpha = 0`.
    Kac,
    /// `1 / (4 pi cosh^2(s - m_alpha))`.
    Strong { m_alpha: f64 },
    /// `1 / (4 pi cosh^2 s)`.
    Weak,
}

/// `m_alpha = 1/2 log S_0` with `S_0 = b(0)^2 + S(2 alpha)`, and its uncertainty.
pub fn strong_shift(profile: &CoefficientProfile) -> Result<(f64, f64)> {
    if profile.phase() != PhaseClass::StrongCrystalline {
        return Err(Error::Domain(format!(
            "strong shift needs a strong crystalline profile, got {}",
            profile.phase()
        )));
    }
    let t = profile.tail_sum_with_bound(2.0 * profile.alpha);
    let s0 = profile.b(0).powi(2) + t.value;
    Ok((0.5 * s0.ln(), 0.5 * t.error_bound / s0))
}

fn sech2_density(s: f64) -> f64 {
    let c = s.cosh();
    1.0 / (4.0 * PI * c * c)
}

/// Limiting intensity per unit area in window coordinates at `Re u = s`.
pub fn limit_intensity(spec: LimitSpec, s: f64) -> Result<f64> {
    match spec {
        LimitSpec::Liquid { alpha } => rho1(alpha, Complex64::new(s, 0.0)),
        LimitSpec::Kac => Ok(kac_closed_form(s)),
        LimitSpec::Strong { m_alpha } => {
            if !m_alpha.is_finite() {
                return invalid("strong limit needs a finite m_alpha");
            }
            Ok(sech2_density(s - m_alpha))
        }
        LimitSpec::Weak => Ok(sech2_density(s)),
    }
}

fn check_interval(s1: f64, s2: f64) -> Result<()> {
    if !(s1 < s2) || s1.is_nan() || s2.is_nan() {
        return invalid(format!("annulus needs s1 < s2, got ({s1}, {s2})"));
    }
    Ok(())
}

fn liquid_ratio(alpha: f64, x: f64) -> Result<f64> {
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    moment_ratio(2.0 * alpha + 1.0, 2.0 * alpha, x)
}

/// Liquid annulus law: expected zeros with `s1 < Re u < s2`, per degree.
pub fn annulus_liquid(alpha: f64, s1: f64, s2: f64) -> Result<f64> {
    check_liquid(alpha)?;
    check_interval(s1, s2)?;
    Ok(liquid_ratio(alpha, 2.0 * s2)? - liquid_ratio(alpha, 2.0 * s1)?)
}

/// Weak crystalline annulus law `(tanh s2 - tanh s1) / 2`.
pub fn annulus_weak(s1: f64, s2: f64) -> Result<f64> {
    check_interval(s1, s2)?;
    Ok(0.5 * (s2.tanh() - s1.tanh()))
}

/// Strong crystalline annulus functional of one `P_inf` sample on a uniform
/// angular grid over `[0, 2 pi)`: the mean of
/// `exp(-|P|^2 e^{-2 s2} / sigma^2) - exp(-|P|^2 e^{-2 s1} / sigma^2)`.
pub fn annulus_strong_functional(p_abs2: &[f64], sigma2: f64, s1: f64, s2: f64) -> Result<f64> {
    check_interval(s1, s2)?;
    if p_abs2.is_empty() || !(sigma2 > 0.0) {
        return invalid("strong annulus needs a nonempty grid and sigma^2 > 0");
    }
    let term = |p: f64, s: f64| {
        if p == 0.0 {
            1.0
        } else {
            (-p * (-2.0 * s).exp() / sigma2).exp()
        }
    };
    let mut acc = KahanSum::new();
    for &p in p_abs2 {
        acc.add(term(p, s2) - term(p, s1));
    }
    Ok(acc.value() / p_abs2.len() as f64)
}

/// `1/2 log(1/tau) + 1/2 log log(1/tau)` with `tau = 1 + 2 alpha`; needs `log(1/tau) > 1`.
pub fn crossover_shift(alpha: f64) -> Result<f64> {
    let tau = 1.0 + 2.0 * alpha;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "crossover needs alpha > -1/2, got {alpha}"
        )));
    }
    let l = (1.0 / tau).ln();
    if !(l > 1.0) {
        return Err(Error::Domain(format!(
            "crossover shift undefined: needs alpha < -(1 - 1/e)/2, got {alpha}"
        )));
    }
    Ok(0.5 * l + 0.5 * l.ln())
}

/// Grid used by [`crossover_error`].
pub const CROSSOVER_GRID: usize = 601;

/// `sup_{s in [-3, 3]} |rho_1(alpha, s + shift) - 1/(4 pi cosh^2 s)|` on a uniform grid.
pub fn crossover_error(alpha: f64) -> Result<f64> {
    let shift = crossover_shift(alpha)?;
    let mut worst: f64 = 0.0;
    for i in 0..CROSSOVER_GRID {
        let s = -3.0 + 6.0 * i as f64 / (CROSSOVER_GRID - 1) as f64;
        let v = rho1(alpha, Complex64::new(s + shift, 0.0))?;
        worst = worst.max((v - sech2_density(s)).abs());
    }
    Ok(worst)
}

/// Moments of a self-inversive polynomial of half-degree `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelfInversiveMoments {
    pub m: usize,
    pub g1: f64,
    pub g2: f64,
    pub u: f64,
    pub v: f64,
}

impl SelfInversiveMoments {
    /// `g1 = sigma^2 sum_{k<=m} b(k)^2`, `g2 = sigma^2 sum (m + 1/2 - k)^2 b(k)^2`.
    pub fn new(profile: &CoefficientProfile, m: usize) -> Result<Self> {
        if m < 1 {
            return invalid("self-inversive moments need m >= 1");
        }
        let s2 = profile.sigma * profile.sigma;
        let half = m as f64 + 0.5;
        let (mut g1, mut g2) = (KahanSum::new(), KahanSum::new());
        for k in 1..=m {
            let b2 = (2.0 * profile.log_b(k)).exp();
            let d = half - k as f64;
            g1.add(b2);
            g2.add(d * d * b2);
        }
        Self::from_moments(m, s2 * g1.value(), s2 * g2.value())
    }

    pub fn from_moments(m: usize, g1: f64, g2: f64) -> Result<Self> {
        if m < 1 || !(g1 > 0.0) || !(g2 > 0.0) || !g1.is_finite() || !g2.is_finite() {
            return invalid("self-inversive moments need m >= 1 and finite g1, g2 > 0");
        }
        Ok(Self {
            m,
            g1,
            g2,
            u: 1.0 / (2.0 * g1).sqrt(),
            v: (m as f64 + 0.5) / (2.0 * g2).sqrt(),
        })
    }

    /// Moments with prescribed `u` and `v`.
    pub fn from_uv(m: usize, u: f64, v: f64) -> Result<Self> {
        if !(u > 0.0 && v > 0.0) {
            return invalid("u and v must be positive");
        }
        let half = m as f64 + 0.5;
        Self::from_moments(m, 1.0 / (2.0 * u * u), half * half / (2.0 * v * v))
    }
}

/// `e^{-d} I_0(d)` for any real `d`.
fn exp_neg_i0(d: f64) -> f64 {
    bessel_i0e(d) * (d.abs() - d).exp()
}

fn fraction_integral(u: f64, v: f64, a: f64, b: f64) -> Result<f64> {
    let cfg = QuadratureConfig::tight();
    quad_ok(
        integrate_real(
            |phi| {
                let s = phi.sin();
                (-u * u * phi.cos().powi(2)).exp() * (erfc(a * s) - b * erfc(v * s)) * s
            },
            0.0,
            PI,
            &cfg,
        ),
        "self-inversive fraction",
    )
}

/// Expected fraction of zeros on the unit circle, closed form with one quadrature:
/// `erf(u) + (u/v) e^{-(u^2+v^2)/2} I_0((u^2-v^2)/2) - (u/sqrt pi) int_0^pi e^{-u^2 cos^2} erfc(v sin) sin`.
pub fn si_fraction_from_moments(mom: &SelfInversiveMoments) -> Result<f64> {
    let (u, v) = (mom.u, mom.v);
    let mid = (u / v) * (-u * u).exp() * exp_neg_i0(0.5 * (v * v - u * u));
    // erfc(0 * s) - 1 * erfc(v s) = -erfc(v s) up to the constant 1 integrated separately.
    let int = fraction_integral(u, v, 0.0, 1.0)?;
    // int = int e^{-u^2 cos^2} (1 - erfc(v s)) s; the plain part is sqrt(pi) erf(u) / u.
    let plain = SQRT_PI * erf(u) / u;
    let erfc_part = plain - int;
    Ok(erf(u) + mid - u / SQRT_PI * erfc_part)
}

pub fn si_expected_fraction(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    si_fraction_from_moments(&SelfInversiveMoments::new(profile, m)?)
}

/// `1 - fraction` rearranged so that nearly equal terms never cancel:
/// `e^{-u^2}(1 - (u/v) e^{-d} I_0(d)) - (u/sqrt pi) int e^{-u^2 cos^2}(erfc(u sin) - erfc(v sin)) sin`,
/// with `d = (v^2 - u^2)/2`.
pub fn si_deficit_from_moments(mom: &SelfInversiveMoments) -> Result<f64> {
    let (u, v) = (mom.u, mom.v);
    let d = 0.5 * (v - u) * (v + u);
    let log_ratio = (u / v).ln() + bessel_i0e(d).ln() + (d.abs() - d);
    let first = (-u * u).exp() * -log_ratio.exp_m1();
    let cfg = QuadratureConfig::tight();
    let second = quad_ok(
        integrate_real(
            |phi| {
                let s = phi.sin();
                (-u * u * phi.cos().powi(2)).exp() * (erfc(u * s) - erfc(v * s)) * s
            },
            0.0,
            PI,
            &cfg,
        ),
        "self-inversive deficit",
    )?;
    Ok(first - u / SQRT_PI * second)
}

pub fn si_deficit(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    si_deficit_from_moments(&SelfInversiveMoments::new(profile, m)?)
}

/// The same fraction from the double-integral form: a Gaussian probability
/// plus `(u/v)/pi int_0^1 int_0^pi exp(-(u^2 cos^2 phi + v^2 sin^2 phi / x^2))`.
pub fn si_fraction_nested(mom: &SelfInversiveMoments) -> Result<f64> {
    let cfg = QuadratureConfig::tight();
    let a = mom.g1.powf(-0.5);
    let gauss =
        2.0 * quad_ok(
            integrate_real(|y| (-0.5 * y * y).exp(), 0.0, a, &cfg),
            "gaussian mass",
        )? / (2.0 * PI).sqrt();
    let (u, v) = (mom.u, mom.v);
    let mut inner_failed = false;
    let inner = |x: f64| -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let f =
            |phi: f64| (-(u * u * phi.cos().powi(2) + v * v * phi.sin().powi(2) / (x * x))).exp();
        // Symmetric about pi/2; the mass sits within ~x/v of the endpoints.
        let cut = (10.0 * x / v).min(0.5 * PI);
        let (a1, _, ok1) = integrate_real(f, 0.0, cut, &cfg);
        let (a2, _, ok2) = if cut < 0.5 * PI {
            integrate_real(f, cut, 0.5 * PI, &cfg)
        } else {
            (0.0, 0.0, true)
        };
        if !(ok1 && ok2) {
            return f64::NAN;
        }
        2.0 * (a1 + a2)
    };
    let outer = integrate_real(
        |x| {
            let v = inner(x);
            if v.is_nan() {
                inner_failed = true;
                0.0
            } else {
                v
            }
        },
        0.0,
        1.0,
        &cfg,
    );
    if inner_failed {
        return Err(Error::Numerical(
            "double integral: inner quadrature did not converge".into(),
        ));
    }
    let double = quad_ok(outer, "double integral")?;
    Ok(gauss + (u / v) / PI * double)
}

/// `(1/m) sqrt(g2 / g1)`.
pub fn g_ratio(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    let mom = SelfInversiveMoments::new(profile, m)?;
    Ok((mom.g2 / mom.g1).sqrt() / m as f64)
}

/// Limit of [`g_ratio`] for `alpha > -1/2`: `1/sqrt((1+alpha)(3+2 alpha))`.
pub fn g_ratio_limit(alpha: f64) -> Result<f64> {
    check_liquid(alpha)?;
    Ok(1.0 / ((1.0 + alpha) * (3.0 + 2.0 * alpha)).sqrt())
}

/// `sum_{k<=m} k b(k)^2` and `S(2 alpha)` from `k = 1`, for the crystalline cases.
fn crystalline_sums(profile: &CoefficientProfile, m: usize) -> (f64, f64) {
    let mut acc = KahanSum::new();
    for k in 1..=m {
        acc.add(k as f64 * (2.0 * profile.log_b(k)).exp());
    }
    (acc.value(), profile.tail_sum(2.0 * profile.alpha))
}

fn require_crystalline_alpha(profile: &CoefficientProfile) -> Result<()> {
    if profile.alpha > -0.5 {
        return Err(Error::Domain(format!(
            "needs alpha <= -1/2, got {}",
            profile.alpha
        )));
    }
    Ok(())
}

/// Leading asymptotic of `1 - g_ratio(m)` for `alpha <= -1/2`.
pub fn one_minus_g_ratio_asymptotic(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    require_crystalline_alpha(profile)?;
    let a = profile.alpha;
    let mf = m as f64;
    let mb2 = mf * (2.0 * profile.log_b(m)).exp();
    if a == -0.5 {
        return Ok(0.75 * mb2 / profile.big_l(m));
    }
    let (kb2, s) = crystalline_sums(profile, m);
    if a > -1.0 {
        Ok((2.0 + a) / ((1.0 + a) * (3.0 + 2.0 * a)) * mb2 / (2.0 * s))
    } else {
        Ok(-0.5 / mf + kb2 / (mf * s))
    }
}

/// `epsilon_{m, alpha}` for `alpha <= -1/2`.
pub fn si_epsilon(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    require_crystalline_alpha(profile)?;
    if m < 1 {
        return invalid("epsilon needs m >= 1");
    }
    let a = profile.alpha;
    let mf = m as f64;
    let mb2 = mf * (2.0 * profile.log_b(m)).exp();
    if a == -0.5 {
        return Ok(0.75 * mb2 / profile.big_l(m));
    }
    let (kb2, s) = crystalline_sums(profile, m);
    if a > -1.0 {
        Ok((2.0 + a) / (2.0 * (1.0 + a) * (3.0 + 2.0 * a) * s) * mb2)
    } else {
        Ok(kb2 / (s * mf))
    }
}

/// `1 - e^{-1/(2 g1(m))} epsilon_{m, alpha}`.
pub fn si_fraction_asymptotic(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    let eps = si_epsilon(profile, m)?;
    let mom = SelfInversiveMoments::new(profile, m)?;
    Ok(1.0 - (-0.5 / mom.g1).exp() * eps)
}

/// Deficit `1 - fraction` in the per-case form with the limiting exponential
/// `e^{-1/(2 sigma^2 S(2 alpha))}` where `S(2 alpha)` is finite.
pub fn si_deficit_asymptotic(profile: &CoefficientProfile, m: usize) -> Result<f64> {
    let eps = si_epsilon(profile, m)?;
    let s = profile.tail_sum(2.0 * profile.alpha);
    let expo = if s.is_finite() {
        (-0.5 / (profile.sigma * profile.sigma * s)).exp()
    } else {
        (-0.5 / SelfInversiveMoments::new(profile, m)?.g1).exp()
    };
    Ok(expo * eps)
}

/// Expected density `p_m(phi)` of circle zeros; `int_0^{2 pi} p_m = (2m+1) fraction`.
pub fn si_circle_intensity(mom: &SelfInversiveMoments, phi: f64) -> f64 {
    let half = mom.m as f64 + 0.5;
    (2.0 * mom.m as f64 + 1.0) * circle_shape(mom, half * phi)
}

/// `p_m / (2m+1)` as a function of `theta = (m + 1/2) phi`; period `pi`.
fn circle_shape(mom: &SelfInversiveMoments, theta: f64) -> f64 {
    let (u, v) = (mom.u, mom.v);
    let (s, c) = theta.sin_cos();
    let sa = s.abs();
    let ec = (-u * u * c * c).exp();
    (u / v) * ec * (-v * v * s * s).exp() / (2.0 * PI) + ec * u / (2.0 * SQRT_PI) * sa * erf(v * sa)
}

/// `int_0^x p_m(phi) d phi`, the expected number of circle zeros with argument in `[0, x]`.
pub fn si_circle_counting(mom: &SelfInversiveMoments, x: f64) -> Result<f64> {
    if !(0.0..=2.0 * PI).contains(&x) {
        return invalid(format!("counting measure needs x in [0, 2 pi], got {x}"));
    }
    let half = mom.m as f64 + 0.5;
    let cfg = QuadratureConfig::tight();
    let theta = half * x;
    let periods = (theta / PI).floor();
    let rest = theta - periods * PI;
    let full = quad_ok(
        integrate_real(|t| circle_shape(mom, t), 0.0, PI, &cfg),
        "circle density",
    )?;
    let part = if rest > 0.0 {
        quad_ok(
            integrate_real(|t| circle_shape(mom, t), 0.0, rest, &cfg),
            "circle density",
        )?
    } else {
        0.0
    };
    Ok((2.0 * mom.m as f64 + 1.0) * (periods * full + part) / half)
}

/// The three auxiliary integral identities, each as `(quadrature, closed form)`.
pub mod identities {
    use super::*;

    /// `int_0^1 e^{-u^2 sin^2 phi / x^2} dx = e^{-u^2 sin^2 phi} - sqrt(pi) erfc(u|sin phi|) u|sin phi|`.
    pub fn eq1(u: f64, phi: f64) -> Result<(f64, f64)> {
        let q = u * phi.sin().abs();
        let cfg = QuadratureConfig::tight();
        let lhs = quad_ok(
            integrate_real(
                |x| {
                    if x == 0.0 {
                        0.0
                    } else {
                        (-(q / x).powi(2)).exp()
                    }
                },
                0.0,
                1.0,
                &cfg,
            ),
            "identity 1",
        )?;
        Ok((lhs, (-q * q).exp() - SQRT_PI * erfc(q) * q))
    }

    /// `(1/sqrt pi) int_0^pi e^{-u^2 cos^2} erfc(u sin) u sin = e^{-u^2} - erfc(u)`.
    pub fn eq2(u: f64) -> Result<(f64, f64)> {
        let cfg = QuadratureConfig::tight();
        let lhs = quad_ok(
            integrate_real(
                |phi| {
                    let s = phi.sin();
                    (-u * u * phi.cos().powi(2)).exp() * erfc(u * s) * u * s
                },
                0.0,
                PI,
                &cfg,
            ),
            "identity 2",
        )? / SQRT_PI;
        Ok((lhs, (-u * u).exp() - erfc(u)))
    }

    /// `(1/pi) int_0^1 int_0^pi e^{-u^2 (cos^2 + sin^2 / x^2)} = erfc(u)`, by nested quadrature.
    pub fn eq3(u: f64) -> Result<(f64, f64)> {
        let mom = SelfInversiveMoments::from_uv(1, u, u)?;
        // The nested form is erf(u) + (1/pi) * (double integral) when u = v.
        let total = si_fraction_nested(&mom)?;
        Ok((total - erf(u), erfc(u)))
    }
}

/// One row of a prediction table.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub quantity: String,
    pub params: Vec<(String, f64)>,
    pub value: f64,
    pub uncertainty: f64,
}

/// CSV `quantity,<param names...>,value,uncertainty`; every row must share the parameter names.
pub fn write_predictions<W: Write>(rows: &[PredictionRow], mut w: W) -> Result<()> {
    let names: Vec<&str> = rows
        .first()
        .map(|r| r.params.iter().map(|(n, _)| n.as_str()).collect())
        .unwrap_or_default();
    write!(w, "quantity")?;
    for n in &names {
        write!(w, ",{n}")?;
    }
    writeln!(w, ",value,uncertainty")?;
    for r in rows {
        if r.params.len() != names.len() || r.params.iter().zip(&names).any(|((a, _), b)| a != b) {
            return invalid("prediction rows must share parameter names");
        }
        write!(w, "{}", r.quantity)?;
        for (_, v) in &r.params {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{},{}", r.value, r.uncertainty)?;
    }
    Ok(())
}
