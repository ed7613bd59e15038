//! Scaling radii `r_n`, normalizers `c_n` and the window maps
//! `z = r_n e^{u/n + i psi}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::profiles::{CoefficientProfile, PhaseClass};
use crate::specfun::lambert_w_m1;
use crate::{invalid, Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_32;

/// Local coordinates around the boundary point `r_n e^{i psi}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingWindow {
    pub n: usize,
    pub psi: f64,
    pub phase: PhaseClass,
    pub radius: f64,
    /// `2n log r_n`, exact even when `r_n` rounds to 1.
    pub log_radius_times_2n: f64,
    pub normalizer: f64,
    /// `a_n` (strong), `a-hat_n` (weak) or 0 (liquid).
    pub a_value: f64,
}

/// Lambert argument `-y` for the crystalline phases, with `y` as a function of `n`.
fn lambert_arg(profile: &CoefficientProfile, phase: PhaseClass, n: usize) -> f64 {
    let nb2 = (n as f64).ln() + 2.0 * profile.log_b(n);
    match phase {
        PhaseClass::StrongCrystalline => nb2.exp(),
        PhaseClass::WeakCrystalline => (nb2 - profile.big_l(n).ln()).exp(),
        PhaseClass::Liquid => 0.0,
    }
}

fn minimal_degree(profile: &CoefficientProfile, phase: PhaseClass, n: usize) -> usize {
    let mut m = n.max(1);
    while m < 1 << 40 {
        m *= 2;
        if lambert_arg(profile, phase, m) < INV_E {
            return m;
        }
    }
    usize::MAX
}

/// The window of `profile` at degree `n` and angle `psi`.
pub fn make_window(profile: &CoefficientProfile, n: usize, psi: f64) -> Result<ScalingWindow> {
    if n < 1 {
        return invalid("window needs n >= 1");
    }
    if !(0.0..2.0 * PI).contains(&psi) {
        return invalid(format!("psi must lie in [0, 2pi), got {psi}"));
    }
    let phase = profile.phase();
    if phase == PhaseClass::Liquid {
        let normalizer = (profile.log_b(n) + 0.5 * (n as f64).ln()).exp();
        return Ok(ScalingWindow {
            n,
            psi,
            phase,
            radius: 1.0,
            log_radius_times_2n: 0.0,
            normalizer,
            a_value: 0.0,
        });
    }
    let y = lambert_arg(profile, phase, n);
    if !(y < INV_E) {
        return Err(Error::DegreeTooSmall {
            n,
            min_n: minimal_degree(profile, phase, n),
        });
    }
    let a = -lambert_w_m1(-y)?.value;
    let normalizer = match phase {
        PhaseClass::WeakCrystalline => profile.big_l(n).sqrt(),
        _ => 1.0,
    };
    Ok(ScalingWindow {
        n,
        psi,
        phase,
        radius: (a / (2.0 * n as f64)).exp(),
        log_radius_times_2n: a,
        normalizer,
        a_value: a,
    })
}

/// Asymptotic form of `a_n` for `alpha < -1/2`:
/// `-2 log b(n) - log n + log log n + log(-2 alpha - 1)`.
pub fn strong_radius_asymptotic(profile: &CoefficientProfile, n: usize) -> Result<f64> {
    if !(profile.alpha < -0.5) {
        return Err(Error::Domain(format!(
            "strong asymptotic needs alpha < -1/2, got {}",
            profile.alpha
        )));
    }
    if n < 3 {
        return invalid("strong asymptotic needs n >= 3");
    }
    let ln = (n as f64).ln();
    Ok(-2.0 * profile.log_b(n) - ln + ln.ln() + (-2.0 * profile.alpha - 1.0).ln())
}

/// Two-term asymptotic `A + log A` of `a-hat_n` with `A = log(L(n) / (n b(n)^2))`.
///
/// For `b(k) = k^{-1/2}` and `L(n) ~ log n` this is `log log n + log log log n`.
pub fn weak_a_asymptotic(profile: &CoefficientProfile, n: usize) -> Result<f64> {
    if profile.phase() != PhaseClass::WeakCrystalline {
        return Err(Error::Domain(
            "weak asymptotic needs a weak crystalline profile".into(),
        ));
    }
    let a = profile.big_l(n).ln() - (n as f64).ln() - 2.0 * profile.log_b(n);
    if !(a > 1.0) {
        return invalid(format!(
            "weak asymptotic needs log(L/(n b^2)) > 1 at n = {n}"
        ));
    }
    Ok(a + a.ln())
}

impl ScalingWindow {
    /// `z = r_n e^{u/n + i psi}`.
    pub fn to_window(&self, u: Complex64) -> Complex64 {
        let n = self.n as f64;
        let log_r = self.log_radius_times_2n / (2.0 * n);
        (Complex64::new(log_r, self.psi) + u / n).exp()
    }

    /// Inverse of [`to_window`](Self::to_window) on the branch centred at `psi`.
    pub fn from_window(&self, z: Complex64) -> Complex64 {
        let n = self.n as f64;
        let re = n * z.norm().ln() - 0.5 * self.log_radius_times_2n;
        let d = (z.arg() - self.psi + PI).rem_euclid(2.0 * PI) - PI;
        Complex64::new(re, n * d)
    }

    /// `Re u` of a point, the scaled log-distance from the circle of radius `r_n`.
    pub fn radial_coordinate(&self, z: Complex64) -> f64 {
        self.n as f64 * z.norm().ln() - 0.5 * self.log_radius_times_2n
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::SlowVariation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn liquid_kac_window() {
        let w = make_window(&CoefficientProfile::power(0.0), 1000, 0.0).unwrap();
        assert_eq!(w.phase, PhaseClass::Liquid);
        assert_eq!(w.radius, 1.0);
        assert!((w.normalizer - 1000f64.sqrt()).abs() < 1e-12);
        // |z| > 1 maps to Re u > 0.
        assert!(w.from_window(c(1.001, 0.0)).re > 0.0);
        assert!((w.to_window(c(1.0, 0.0)) - c(1e-3f64.exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lambert_fixed_point_window() {
        // b(k) = c / k with c^2 = 2 e^{-2} n makes n b(n)^2 = 2 e^{-2}.
        let n = 4usize;
        let c2 = 2.0 * (-2.0f64).exp() * n as f64;
        let prof = CoefficientProfile::new(-1.0, SlowVariation::Constant(c2.sqrt()), 1.0).unwrap();
        let w = make_window(&prof, n, 0.0).unwrap();
        assert!((w.a_value - 2.0).abs() < 1e-13);
        assert!((w.radius - (1.0 / n as f64).exp()).abs() < 1e-14);
        assert_eq!(w.normalizer, 1.0);
    }

    #[test]
    fn strong_identity_and_growth() {
        let prof = CoefficientProfile::power(-2.0);
        let mut prev_a = 0.0;
        let mut prev_excess = 0.0;
        for e in 3..=7 {
            let n = 10usize.pow(e);
            let w = make_window(&prof, n, 0.0).unwrap();
            // r^{2n} = e^{a} = a / (n b^2)
            let nb2 = n as f64 * prof.b(n).powi(2);
            assert!(((w.a_value.exp() * nb2) / w.a_value - 1.0).abs() < 1e-10);
            assert!(w.a_value > prev_a);
            assert!(w.a_value / (n as f64).ln() < 4.0);
            let excess = n as f64 * (w.radius - 1.0);
            assert!(excess > prev_excess);
            prev_a = w.a_value;
            prev_excess = excess;
        }
    }

    #[test]
    fn strong_asymptotic_gap() {
        let prof = CoefficientProfile::power(-2.0);
        let n = 1000usize;
        let v = strong_radius_asymptotic(&prof, n).unwrap();
        let ln = (n as f64).ln();
        assert!((v - (3.0 * ln + ln.ln() + 3f64.ln())).abs() < 1e-12);
        // Gaps a_n - asymptotic from a 30-digit mpmath evaluation.
        let gaps = [
            (1000, 0.142497),
            (10_000, 0.117213),
            (100_000, 0.100258),
            (1_000_000, 0.0879958),
        ];
        let mut prev = f64::INFINITY;
        for (n, want) in gaps {
            let a = make_window(&prof, n, 0.0).unwrap().a_value;
            let gap = a - strong_radius_asymptotic(&prof, n).unwrap();
            assert!((gap - want).abs() < 1e-5, "n = {n}: {gap}");
            assert!(gap < prev);
            prev = gap;
        }
        assert!(
            (make_window(&prof, 1_000_000, 0.0).unwrap().a_value - 45.258_931_710_426_51).abs()
                < 1e-9
        );
        assert!(strong_radius_asymptotic(&CoefficientProfile::power(-0.5), 100).is_err());
    }

    #[test]
    fn weak_critical_family() {
        let prof = CoefficientProfile::power(-0.5);
        let w = make_window(&prof, 1_000_000, 1.0).unwrap();
        assert_eq!(w.phase, PhaseClass::WeakCrystalline);
        // mpmath: -W_{-1}(-1/H_n) at n = 1e6.
        assert!((w.a_value - 4.070_485_195_227_727).abs() < 1e-10);
        assert!((w.normalizer - prof.big_l(1_000_000).sqrt()).abs() < 1e-12);
        // Relative gap to log log n + log log log n, from mpmath.
        let gaps = [
            (1000usize, 0.181234),
            (10_000, 0.149219),
            (100_000, 0.130364),
            (1_000_000, 0.117753),
        ];
        let mut prev = f64::INFINITY;
        for (n, want) in gaps {
            let a = make_window(&prof, n, 0.0).unwrap().a_value;
            let ln = (n as f64).ln();
            let asy = ln.ln() + ln.ln().ln();
            let rel = (a - asy) / a;
            assert!((rel - want).abs() < 1e-5, "n = {n}: {rel}");
            assert!(rel < prev);
            prev = rel;
        }
        let two_term = weak_a_asymptotic(&prof, 1_000_000).unwrap();
        assert!(((w.a_value - two_term) / w.a_value).abs() < 0.12);
    }

    #[test]
    fn degree_too_small_reports_minimum() {
        // b(k) = 10 k^{-2}: n b^2 = 100 / n^3 < 1/e needs n >= 7.
        let prof = CoefficientProfile::new(-2.0, SlowVariation::Constant(10.0), 1.0).unwrap();
        match make_window(&prof, 2, 0.0) {
            Err(Error::DegreeTooSmall { n, min_n }) => {
                assert_eq!(n, 2);
                assert_eq!(min_n, 8);
            }
            other => panic!("{other:?}"),
        }
        assert!(make_window(&prof, 8, 0.0).is_ok());
    }

    #[test]
    fn window_round_trip() {
        let prof = CoefficientProfile::power(-2.0);
        let w = make_window(&prof, 100, 2.5).unwrap();
        assert!((w.to_window(c(0.0, 0.0)) - Complex64::from_polar(w.radius, 2.5)).norm() < 1e-15);
        let u = c(1.0, 2.0);
        assert!((w.from_window(w.to_window(u)) - u).norm() < 1e-12);
        for i in 0..50 {
            let u = c(-3.0 + 0.13 * i as f64, -150.0 + 6.1 * i as f64);
            assert!((w.from_window(w.to_window(u)) - u).norm() < 1e-10);
        }
    }

    #[test]
    fn liquid_normalizer_matches_karamata() {
        let prof = CoefficientProfile::power(0.5);
        let n = 1_000_000;
        let w = make_window(&prof, n, 0.0).unwrap();
        let karamata = ((1.0 + 2.0 * prof.alpha) * prof.big_l(n)).sqrt();
        assert!((w.normalizer / karamata - 1.0).abs() < 0.02);
    }

    #[test]
    fn json_fields() {
        let w = make_window(&CoefficientProfile::power(-2.0), 1000, 0.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&w.to_json().unwrap()).unwrap();
        for key in [
            "n",
            "psi",
            "phase",
            "radius",
            "log_radius_times_2n",
            "normalizer",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(make_window(&CoefficientProfile::power(0.0), 10, 7.0).is_err());
    }
}
