//! Secondary real branch `W_{-1}` of the Lambert W function.

use crate::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_321_595_523_770_161_460_867;
const MAX_HALLEY: usize = 30;

/// Value of `W_{-1}(x)` with a flag set when `x` sat at the branch point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambertW {
    pub value: f64,
    pub near_branch_point: bool,
}

/// Leading terms of the expansion of `W_{-1}` as `x -> 0-`:
/// `-L - log L - log L / L` with `L = log(-1/x)`.
pub fn w_m1_asymptotic_seed(x: f64) -> f64 {
    let l = (-1.0 / x).ln();
    let ll = l.ln();
    -l - ll - ll / l
}

fn branch_point_seed(x: f64) -> f64 {
    // Puiseux series at -1/e in p = -sqrt(2(1 + e x)).
    let p = -(2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

/// True when `w e^w - x` changes sign within four ulps of `w`.
///
/// For `|w|` beyond about 10 the nearest double to the root already has a
/// relative residual above 1e-14, so this is the attainable stopping test.
pub fn brackets_root(w: f64, x: f64) -> bool {
    let h = 4.0 * f64::EPSILON * w.abs();
    let f = |t: f64| t * t.exp() - x;
    f(w - h) * f(w + h) <= 0.0
}

/// `W_{-1}(x)` for `x` in `(-1/e, 0)`, refined by Halley iteration.
///
/// Inputs within 1e-15 of `-1/e` return `-1` with `near_branch_point` set.
pub fn lambert_w_m1(x: f64) -> Result<LambertW> {
    if !x.is_finite() || x >= 0.0 {
        return Err(Error::Domain(format!("W_-1 needs x in (-1/e, 0), got {x}")));
    }
    if (x + INV_E).abs() <= 1e-15 {
        return Ok(LambertW {
            value: -1.0,
            near_branch_point: true,
        });
    }
    if x < -INV_E {
        return Err(Error::Domain(format!("W_-1 needs x in (-1/e, 0), got {x}")));
    }
    let mut w = if x < -0.25 {
        branch_point_seed(x)
    } else {
        w_m1_asymptotic_seed(x)
    };
    if w > -1.0 {
        w = -1.0 - 1e-8;
    }
    for _ in 0..MAX_HALLEY {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= 1e-15 * x.abs() {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            w -= 1e-8;
            continue;
        }
        let fp = ew * wp1;
        let step = f / (fp - (w + 2.0) * f / (2.0 * wp1));
        let mut next = w - step;
        if next > -1.0 {
            next = 0.5 * (w - 1.0);
        }
        if next == w {
            break;
        }
        w = next;
    }
    let resid = (w * w.exp() - x).abs();
    if resid > 1e-14 * x.abs() && !brackets_root(w, x) {
        return Err(Error::Numerical(format!(
            "W_-1({x}) did not converge: residual {resid:e}"
        )));
    }
    Ok(LambertW {
        value: w,
        near_branch_point: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn branch_point_returns_minus_one_with_flag() {
        let r = lambert_w_m1(-INV_E).unwrap();
        assert_eq!(r.value, -1.0);
        assert!(r.near_branch_point);
    }

    #[test]
    fn fixed_point_minus_two() {
        let x = -2.0 * (-2.0f64).exp();
        let r = lambert_w_m1(x).unwrap();
        assert!((r.value + 2.0).abs() < 1e-14);
        assert!(!r.near_branch_point);
    }

    #[test]
    fn minus_one_thousandth_matches_bisection() {
        // Independent oracle: bisection of w e^w = x on (-40, -1).
        let x = -1e-3;
        let (mut lo, mut hi) = (-40.0f64, -1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            // w e^w is decreasing on (-inf, -1)
            if mid * mid.exp() > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let w = lambert_w_m1(x).unwrap().value;
        assert!((w - oracle).abs() < 1e-12, "{w} vs {oracle}");
        // Frozen value.
        assert!((w + 9.118_006_470_402_74).abs() < 1e-11);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(lambert_w_m1(0.0), Err(Error::Domain(_))));
        assert!(matches!(lambert_w_m1(-0.5), Err(Error::Domain(_))));
        assert!(matches!(lambert_w_m1(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_on_log_spaced_grid() {
        let lo = (-INV_E + 1e-9).abs().ln();
        let hi = (1e-300f64).ln();
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let x = -(lo + t * (hi - lo)).exp();
            let w = lambert_w_m1(x).unwrap().value;
            assert!(w <= -1.0);
            let rel = (w * w.exp() - x).abs() / x.abs();
            assert!(
                rel <= 1e-14 || brackets_root(w, x),
                "x = {x:e}, rel {rel:e}"
            );
            if w > -9.0 {
                assert!(rel <= 1e-14, "x = {x:e}, rel {rel:e}");
            }
        }
    }

    #[test]
    fn asymptotic_seed_within_five_percent() {
        for e in 4..=300 {
            let x = -10f64.powi(-e);
            let w = lambert_w_m1(x).unwrap().value;
            let seed = w_m1_asymptotic_seed(x);
            assert!(((seed - w) / w).abs() <= 0.05, "x = 1e-{e}");
        }
    }

    proptest! {
        #[test]
        fn residual_property(t in 0.0f64..1.0) {
            let x = -INV_E * (1.0 - t).max(1e-12) ;
            prop_assume!(x > -INV_E + 1e-14);
            let w = lambert_w_m1(x).unwrap().value;
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-14 * x.abs() || brackets_root(w, x));
        }
    }
}
