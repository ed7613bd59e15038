//! Regularly varying coefficient profiles `b(x) = x^alpha l(x)`.
//!
//! The slowly varying factor `l` comes from a closed list of kinds so that
//! summability questions (`S(-1; l) < inf`?) are answered analytically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::specfun::quad::{integrate_real_to_infinity, QuadratureConfig};
use crate::sum::{KahanSum, LogSumExp};
use crate::{invalid, Error, Result};

/// Slowly varying factor `l(x)`, evaluated as `l(max(x, x0))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlowVariation {
    /// `l(x) = c`, `c > 0`.
    Constant(f64),
    /// `l(x) = log(x)^beta`, clamped below at `x0 = e`.
    LogPower(f64),
    /// `l(x) = exp(log(x)^gamma)`, `gamma` in `(0, 1)`, `x0 = 1`.
    ExpLogPower(f64),
    /// `l(x) = log log x`, clamped below at `x0 = e^e`.
    IterLog,
}

impl SlowVariation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SlowVariation::Constant(c) if !(c > 0.0 && c.is_finite()) => {
                invalid(format!("const:{c} must be positive"))
            }
            SlowVariation::LogPower(b) if !b.is_finite() => {
                invalid("logpow exponent must be finite")
            }
            SlowVariation::ExpLogPower(g) if !(g > 0.0 && g < 1.0) => {
                invalid(format!("explogpow:{g} needs gamma in (0,1)"))
            }
            _ => Ok(()),
        }
    }

    /// Lower clamp point `x0` with `l(x) > 0` for `x >= x0`.
    pub fn x0(&self) -> f64 {
        match self {
            SlowVariation::Constant(_) | SlowVariation::ExpLogPower(_) => 1.0,
            SlowVariation::LogPower(_) => std::f64::consts::E,
            SlowVariation::IterLog => std::f64::consts::E.exp(),
        }
    }

    /// `log l(x)` for real `x > 0`.
    pub fn log_value(&self, x: f64) -> f64 {
        let x = x.max(self.x0());
        match *self {
            SlowVariation::Constant(c) => c.ln(),
            SlowVariation::LogPower(b) => b * x.ln().ln(),
            SlowVariation::ExpLogPower(g) => x.ln().powf(g),
            SlowVariation::IterLog => x.ln().ln().ln(),
        }
    }

    /// `log l(x)` as a function of `log x`, usable beyond the f64 range of `x`.
    pub fn log_value_ln(&self, lx: f64) -> f64 {
        let lx = lx.max(self.x0().ln());
        match *self {
            SlowVariation::Constant(c) => c.ln(),
            SlowVariation::LogPower(b) => b * lx.ln(),
            SlowVariation::ExpLogPower(g) => lx.powf(g),
            SlowVariation::IterLog => lx.ln().ln(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.log_value(x).exp()
    }

    /// Whether `sum_k l(k)^2 / k` converges.
    pub fn harmonic_sum_finite(&self) -> bool {
        match *self {
            SlowVariation::LogPower(b) => b < -0.5,
            _ => false,
        }
    }
}

impl fmt::Display for SlowVariation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowVariation::Constant(c) => write!(f, "const:{c}"),
            SlowVariation::LogPower(b) => write!(f, "logpow:{b}"),
            SlowVariation::ExpLogPower(g) => write!(f, "explogpow:{g}"),
            SlowVariation::IterLog => write!(f, "iterlog"),
        }
    }
}

impl FromStr for SlowVariation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| -> Result<f64> {
            v.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("bad number '{v}' in slow variation '{s}'"))
            })
        };
        let sv = if s == "iterlog" {
            SlowVariation::IterLog
        } else if let Some(v) = s.strip_prefix("const:") {
            SlowVariation::Constant(num(v)?)
        } else if let Some(v) = s.strip_prefix("logpow:") {
            SlowVariation::LogPower(num(v)?)
        } else if let Some(v) = s.strip_prefix("explogpow:") {
            SlowVariation::ExpLogPower(num(v)?)
        } else {
            return invalid(format!("unknown slow variation '{s}'"));
        };
        sv.validate()?;
        Ok(sv)
    }
}

/// Phase of the zero process near the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseClass {
    Liquid,
    WeakCrystalline,
    StrongCrystalline,
}

impl fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseClass::Liquid => "Liquid",
            PhaseClass::WeakCrystalline => "WeakCrystalline",
            PhaseClass::StrongCrystalline => "StrongCrystalline",
        };
        f.write_str(s)
    }
}

/// `b(k) = k^alpha l(k)` with coefficient scale `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientProfile {
    pub alpha: f64,
    pub slow: SlowVariation,
    pub sigma: f64,
}

/// A convergent series together with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub error_bound: f64,
}

impl CoefficientProfile {
    pub fn new(alpha: f64, slow: SlowVariation, sigma: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return invalid("alpha must be finite");
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return invalid("sigma must be positive");
        }
        slow.validate()?;
        Ok(Self { alpha, slow, sigma })
    }

    /// Profile with `l = 1` and `sigma = 1`.
    pub fn power(alpha: f64) -> Self {
        Self {
            alpha,
            slow: SlowVariation::Constant(1.0),
            sigma: 1.0,
        }
    }

    /// `log b(x)` for real `x >= 1`.
    pub fn log_b_at(&self, x: f64) -> f64 {
        self.alpha * x.ln() + self.slow.log_value(x)
    }

    /// `log b(k)`; `b(0)` is taken equal to `b(1)`.
    pub fn log_b(&self, k: usize) -> f64 {
        self.log_b_at(k.max(1) as f64)
    }

    pub fn b(&self, k: usize) -> f64 {
        self.log_b(k).exp()
    }

    /// `b(k)` for `k = 0..=n`.
    pub fn b_table(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.b(k)).collect()
    }

    fn log_term(&self, k: f64, gamma: f64) -> f64 {
        gamma * k.ln() + 2.0 * self.slow.log_value(k)
    }

    /// `log(x^gamma l(x)^2)` from `log x`; `-inf` at `log x = +inf`, where the
    /// callers only use convergent tails.
    fn log_term_ln(&self, lx: f64, gamma: f64) -> f64 {
        if lx == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        gamma * lx + 2.0 * self.slow.log_value_ln(lx)
    }

    /// `log S_n(gamma; l; q)` with `S_n = sum_{k=1}^n k^gamma l(k)^2 q^k`.
    pub fn log_partial_power_sum(&self, n: usize, gamma: f64, q: f64) -> Result<f64> {
        if n < 1 {
            return invalid("partial_power_sum needs n >= 1");
        }
        if !(q > 0.0) {
            return invalid("partial_power_sum needs q > 0");
        }
        let lq = q.ln();
        let mut lse = LogSumExp::new();
        for k in 1..=n {
            let kf = k as f64;
            lse.add(self.log_term(kf, gamma) + kf * lq);
        }
        Ok(lse.value())
    }

    /// `S_n(gamma; l; q)`; compensated summation, switching to log-sum-exp
    /// when a term's log-magnitude exceeds 600.
    pub fn partial_power_sum(&self, n: usize, gamma: f64, q: f64) -> Result<f64> {
        if n < 1 {
            return invalid("partial_power_sum needs n >= 1");
        }
        if !(q > 0.0) {
            return invalid("partial_power_sum needs q > 0");
        }
        let lq = q.ln();
        let logs: Vec<f64> = (1..=n)
            .map(|k| self.log_term(k as f64, gamma) + k as f64 * lq)
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max > 600.0 {
            let mut lse = LogSumExp::new();
            for l in &logs {
                lse.add(*l);
            }
            let l = lse.value();
            if l > f64::MAX.ln() {
                return Err(Error::MagnitudeOutOfRange(l));
            }
            return Ok(l.exp());
        }
        let mut acc = KahanSum::new();
        for l in logs {
            acc.add(l.exp());
        }
        Ok(acc.value())
    }

    /// Whether `S(gamma; l) = sum_k k^gamma l(k)^2` converges.
    pub fn tail_sum_finite(&self, gamma: f64) -> bool {
        if gamma < -1.0 {
            true
        } else if gamma == -1.0 {
            self.slow.harmonic_sum_finite()
        } else {
            false
        }
    }

    /// `int_from^inf x^gamma l(x)^2 dx` for a convergent series.
    pub fn tail_integral(&self, gamma: f64, from: f64) -> f64 {
        if !self.tail_sum_finite(gamma) {
            return f64::INFINITY;
        }
        let from = from.max(self.slow.x0());
        if gamma == -1.0 {
            if let SlowVariation::LogPower(b) = self.slow {
                return from.ln().powf(2.0 * b + 1.0) / (-2.0 * b - 1.0);
            }
        }
        let lf = from.ln();
        let cfg = QuadratureConfig::tight();
        let (v, _, _) = integrate_real_to_infinity(
            |t| (self.log_term_ln(lf + t, gamma) + lf + t).exp(),
            0.0,
            &cfg,
        );
        v
    }

    /// `S(gamma; l)` with an explicit truncation error bound, or `+inf`.
    pub fn tail_sum_with_bound(&self, gamma: f64) -> TailSum {
        if !self.tail_sum_finite(gamma) {
            return TailSum {
                value: f64::INFINITY,
                error_bound: 0.0,
            };
        }
        // Euler-Maclaurin at cut N: sum_{k<N} f + f(N)/2 + int_N^inf f - f'(N)/12,
        // remainder bounded by |f''(N)|/720 for eventually monotone f''.
        let g = |t: f64| self.log_term_ln(t, gamma);
        let derivs = |x: f64| {
            let t = x.ln();
            let d = 1e-3;
            let (gm, g0, gp) = (g(t - d), g(t), g(t + d));
            let h1 = (gp - gm) / (2.0 * d);
            let h2 = (gp - 2.0 * g0 + gm) / (d * d);
            let g1 = h1 / x;
            let g2 = (h2 - h1) / (x * x);
            let f = g0.exp();
            (f, f * g1, f * (g2 + g1 * g1))
        };
        let mut n = 64usize.max(self.slow.x0().ceil() as usize + 2);
        loop {
            let (_, _, f2) = derivs(n as f64);
            let bound = f2.abs() / 720.0;
            if bound <= 1e-12 || n >= 1 << 26 {
                break;
            }
            n *= 2;
        }
        let nf = n as f64;
        let (fn_, f1, f2) = derivs(nf);
        let mut acc = KahanSum::new();
        for k in 1..n {
            acc.add(self.log_term(k as f64, gamma).exp());
        }
        acc.add(0.5 * fn_);
        acc.add(self.tail_integral(gamma, nf));
        acc.add(-f1 / 12.0);
        TailSum {
            value: acc.value(),
            error_bound: f2.abs() / 720.0 + 1e-13 * acc.value().abs(),
        }
    }

    /// `S(gamma; l)`, `+inf` when divergent.
    pub fn tail_sum(&self, gamma: f64) -> f64 {
        self.tail_sum_with_bound(gamma).value
    }

    /// `L(n) = sum_{k=1}^n b(k)^2`.
    pub fn big_l(&self, n: usize) -> f64 {
        let mut acc = KahanSum::new();
        for k in 1..=n {
            acc.add((2.0 * self.log_b(k)).exp());
        }
        acc.value()
    }

    /// `[L(0), L(1), ..., L(n)]`.
    pub fn big_l_table(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = KahanSum::new();
        out.push(0.0);
        for k in 1..=n {
            acc.add((2.0 * self.log_b(k)).exp());
            out.push(acc.value());
        }
        out
    }

    pub fn phase(&self) -> PhaseClass {
        phase_classify(self)
    }
}

/// Liquid iff `alpha > -1/2`; at `alpha = -1/2` the finiteness of `S(-1; l)` decides.
pub fn phase_classify(profile: &CoefficientProfile) -> PhaseClass {
    if profile.alpha > -0.5 {
        PhaseClass::Liquid
    } else if profile.alpha < -0.5 || profile.tail_sum_finite(-1.0) {
        PhaseClass::StrongCrystalline
    } else {
        PhaseClass::WeakCrystalline
    }
}

impl fmt::Display for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={},slow={},sigma={}",
            self.alpha, self.slow, self.sigma
        )
    }
}

impl FromStr for CoefficientProfile {
    type Err = Error;

    /// Parses `alpha=<f>,slow=<kind>,sigma=<f>`; `slow` defaults to `const:1`
    /// and `sigma` to 1.
    fn from_str(s: &str) -> Result<Self> {
        let mut alpha = None;
        let mut slow = SlowVariation::Constant(1.0);
        let mut sigma = 1.0;
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("profile field '{part}' is not key=value"))
            })?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad number '{v}' for {key}")))
            };
            match key.trim() {
                "alpha" => alpha = Some(num(value)?),
                "slow" => slow = value.parse()?,
                "sigma" => sigma = num(value)?,
                other => return invalid(format!("unknown profile field '{other}'")),
            }
        }
        let alpha =
            alpha.ok_or_else(|| Error::InvalidInput(format!("profile '{s}' has no alpha")))?;
        CoefficientProfile::new(alpha, slow, sigma)
    }
}

impl Serialize for CoefficientProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoefficientProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hyperbolic weight `b_{2 alpha}(k) = sqrt((2a+1)(2a+2)...(2a+k) / k!)`.
pub fn hyperbolic_weight(alpha: f64, k: usize) -> Result<f64> {
    Ok(log_hyperbolic_weights(alpha, k)?[k].exp())
}

/// `log b_{2 alpha}(k)` for `k = 0..=n`, accumulated as sums of logarithms.
pub fn log_hyperbolic_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > -0.5) {
        return invalid(format!("hyperbolic weights need alpha > -1/2, got {alpha}"));
    }
    let two_a = 2.0 * alpha;
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = KahanSum::new();
    out.push(0.0);
    for j in 1..=n {
        acc.add(0.5 * (two_a / j as f64).ln_1p());
        out.push(acc.value());
    }
    Ok(out)
}
