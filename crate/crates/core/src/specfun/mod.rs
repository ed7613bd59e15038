//! Special functions used by the intensity and fraction formulas.

pub mod erf;
pub mod lambert;
pub mod phi;
pub mod quad;

pub use erf::{bessel_i0, bessel_i0e, erf, erf_erfc, erfc};
pub use lambert::{lambert_w_m1, LambertW};
pub use phi::{log_phi, log_phi_with, phi, phi_ratio_real, phi_ratio_with, phi_with};
pub use quad::{integrate, integrate_real, QuadratureConfig};

use num_complex::Complex64;

use crate::profiles::CoefficientProfile;
use crate::sum::ComplexKahanSum;
use crate::Result;

/// Finite-n covariance sum `(1/(n b(n)^2)) sum_{k=0}^n b(k)^2 e^{k w/n} e^{i psi k}`.
///
/// Converges to `Phi_{2 alpha}(w)` for `psi` in `2 pi Z` and to zero otherwise
/// when `alpha > -1/2`.
pub fn covariance_sum(
    profile: &CoefficientProfile,
    n: usize,
    w: Complex64,
    psi: f64,
) -> Result<Complex64> {
    if n < 1 {
        return crate::invalid("covariance_sum needs n >= 1");
    }
    if !(profile.alpha > -0.5) {
        return crate::invalid("covariance_sum is defined for alpha > -1/2");
    }
    let nf = n as f64;
    let log_bn2 = 2.0 * profile.log_b(n);
    let step = w / nf + Complex64::new(0.0, psi);
    let mut acc = ComplexKahanSum::new();
    for k in 0..=n {
        let kf = k as f64;
        let lw = 2.0 * profile.log_b(k) - log_bn2;
        acc.add((step * kf + lw).exp());
    }
    Ok(acc.value() / nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::SlowVariation;

    fn kac() -> CoefficientProfile {
        CoefficientProfile::new(0.0, SlowVariation::Constant(1.0), 1.0).unwrap()
    }

    #[test]
    fn flat_profile_at_origin() {
        let v = covariance_sum(&kac(), 10_000, Complex64::new(0.0, 0.0), 0.0).unwrap();
        assert!((v.re - 10_001.0 / 10_000.0).abs() < 1e-12);
    }

    #[test]
    fn off_lattice_angle_vanishes() {
        let v = covariance_sum(
            &kac(),
            10_000,
            Complex64::new(0.0, 0.0),
            std::f64::consts::PI,
        )
        .unwrap();
        assert!(v.norm() < 1e-3);
    }

    #[test]
    fn converges_to_phi() {
        let w = Complex64::new(2.0, 0.0);
        let v = covariance_sum(&kac(), 100_000, w, 0.0).unwrap();
        let target = phi(0.0, w).unwrap();
        assert!((v - target).norm() < 1e-3);
    }
}
