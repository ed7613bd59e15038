//! Coefficient laws, seeded random streams and the polynomial families.
//!
//! Every sampler is a pure function of its arguments and a [`SeedSpec`]; the
//! generator is ChaCha8 keyed by a hash of the master seed with the trial
//! index as the stream id, so draws do not depend on thread scheduling.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::profiles::{CoefficientProfile, PhaseClass};
use crate::sum::KahanSum;
use crate::{invalid, Error, Result};

/// Distribution of the i.i.d. coefficients `xi_k`; all laws are centred.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientLaw {
    /// `E|xi|^2 = sigma^2`, real and imaginary parts i.i.d. `N(0, sigma^2/2)`.
    IsotropicComplexNormal {
        sigma: f64,
    },
    /// Independent `N(0, s1^2)` real part and `N(0, s2^2)` imaginary part.
    SplitNormal {
        s1: f64,
        s2: f64,
    },
    RealRademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    RealUniform,
}

impl CoefficientLaw {
    pub fn isotropic(sigma: f64) -> Result<Self> {
        Self::IsotropicComplexNormal { sigma }.validated()
    }

    pub fn split(s1: f64, s2: f64) -> Result<Self> {
        Self::SplitNormal { s1, s2 }.validated()
    }

    fn validated(self) -> Result<Self> {
        match self {
            CoefficientLaw::IsotropicComplexNormal { sigma }
                if !(sigma > 0.0 && sigma.is_finite()) =>
            {
                invalid("icn law needs sigma > 0 (a law concentrated at zero is not allowed)")
            }
            CoefficientLaw::SplitNormal { s1, s2 }
                if !(s1 >= 0.0
                    && s2 >= 0.0
                    && s1.is_finite()
                    && s2.is_finite()
                    && s1 * s1 + s2 * s2 > 0.0) =>
            {
                invalid("split law needs s1, s2 >= 0 with s1^2 + s2^2 > 0")
            }
            law => Ok(law),
        }
    }

    /// Standard deviations of the real and imaginary parts.
    pub fn component_sigmas(&self) -> (f64, f64) {
        match *self {
            CoefficientLaw::IsotropicComplexNormal { sigma } => (sigma / SQRT_2, sigma / SQRT_2),
            CoefficientLaw::SplitNormal { s1, s2 } => (s1, s2),
            CoefficientLaw::RealRademacher | CoefficientLaw::RealUniform => (1.0, 0.0),
        }
    }

    /// `sigma^2 = E|xi|^2`.
    pub fn variance(&self) -> f64 {
        let (a, b) = self.component_sigmas();
        a * a + b * b
    }

    /// `E[xi^2] = sigma_1^2 - sigma_2^2`.
    pub fn pseudo_variance(&self) -> f64 {
        let (a, b) = self.component_sigmas();
        a * a - b * b
    }

    pub fn is_isotropic(&self) -> bool {
        let (a, b) = self.component_sigmas();
        a == b
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            CoefficientLaw::IsotropicComplexNormal { .. } | CoefficientLaw::SplitNormal { .. }
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            CoefficientLaw::IsotropicComplexNormal { .. } | CoefficientLaw::SplitNormal { .. } => {
                let (a, b) = self.component_sigmas();
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                Complex64::new(a * x, b * y)
            }
            CoefficientLaw::RealRademacher => {
                Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
            }
            CoefficientLaw::RealUniform => {
                let s = 3f64.sqrt();
                Complex64::new(rng.random_range(-s..s), 0.0)
            }
        }
    }
}

impl fmt::Display for CoefficientLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientLaw::IsotropicComplexNormal { sigma } => write!(f, "icn:{sigma}"),
            CoefficientLaw::SplitNormal { s1, s2 } => write!(f, "split:{s1},{s2}"),
            CoefficientLaw::RealRademacher => f.write_str("rademacher"),
            CoefficientLaw::RealUniform => f.write_str("uniform"),
        }
    }
}

impl FromStr for CoefficientLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number '{v}' in law '{s}'")))
        };
        match s {
            "rademacher" => Ok(CoefficientLaw::RealRademacher),
            "uniform" => Ok(CoefficientLaw::RealUniform),
            _ => {
                if let Some(v) = s.strip_prefix("icn:") {
                    CoefficientLaw::isotropic(num(v)?)
                } else if let Some(v) = s.strip_prefix("split:") {
                    let (a, b) = v.split_once(',').ok_or_else(|| {
                        Error::InvalidInput(format!("split law needs two values: '{s}'"))
                    })?;
                    CoefficientLaw::split(num(a)?, num(b)?)
                } else {
                    invalid(format!("unknown law '{s}'"))
                }
            }
        }
    }
}

impl Serialize for CoefficientLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoefficientLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Identifies one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Generator keyed by `sha256(master_seed)` on stream `stream_id`, word position 0.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(b"rpz-seed-v1");
        h.update(self.master_seed.to_le_bytes());
        let key: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(0);
        rng
    }

    /// A derived stream for an auxiliary purpose within the same trial.
    pub fn child(&self, tag: u64) -> SeedSpec {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id: splitmix64(splitmix64(self.stream_id) ^ splitmix64(!tag)),
        }
    }
}

/// Draws `count` coefficients; the first `j` draws do not depend on `count`.
pub fn draw_xi(law: &CoefficientLaw, count: usize, seed: SeedSpec) -> Vec<Complex64> {
    let mut rng = seed.rng();
    (0..count).map(|_| law.sample(&mut rng)).collect()
}

/// Dense polynomial `e^{log_scale} sum_k coeffs[k] z^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    pub coeffs: Vec<Complex64>,
    pub log_scale: f64,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            log_scale: 0.0,
        }
    }

    /// Highest index with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    /// Divides by `max |c_k|` and folds the factor into `log_scale`.
    pub fn normalized(&self) -> Self {
        let m = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return self.clone();
        }
        Self {
            coeffs: self.coeffs.iter().map(|c| c / m).collect(),
            log_scale: self.log_scale + m.ln(),
        }
    }

    /// Horner evaluation without the `e^{log_scale}` factor.
    pub fn eval_unscaled(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_unscaled(z) * self.log_scale.exp()
    }

    /// `(p(z), p'(z))` without the scale factor.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut d = zero;
        for c in self.coeffs.iter().rev() {
            d = d * z + p;
            p = p * z + c;
        }
        (p, d)
    }

    /// `sum_k |c_k| |z|^k`, the scale against which residuals are measured.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }
}

fn polynomial_from_logs(log_b: &[f64], xi: &[Complex64]) -> ComplexPolynomial {
    let max = log_b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let coeffs = log_b
        .iter()
        .zip(xi)
        .map(|(l, x)| x * (l - max).exp())
        .collect();
    ComplexPolynomial {
        coeffs,
        log_scale: max,
    }
}

/// `P_n(z) = sum_{k=0}^n b(k) xi_k z^k` from given coefficients `xi_0..xi_n`.
pub fn sample_polynomial_from_xi(
    profile: &CoefficientProfile,
    xi: &[Complex64],
) -> Result<ComplexPolynomial> {
    if xi.len() < 2 {
        return invalid("a polynomial needs at least two coefficients");
    }
    let logs: Vec<f64> = (0..xi.len()).map(|k| profile.log_b(k)).collect();
    Ok(polynomial_from_logs(&logs, xi))
}

/// Random polynomial of degree `n` with i.i.d. coefficients from `law`.
pub fn sample_polynomial(
    profile: &CoefficientProfile,
    law: &CoefficientLaw,
    n: usize,
    seed: SeedSpec,
) -> Result<ComplexPolynomial> {
    if n < 1 {
        return invalid("sample_polynomial needs n >= 1");
    }
    sample_polynomial_from_xi(profile, &draw_xi(law, n + 1, seed))
}

/// Polynomial with explicit weights `w_k` (used for hyperbolic families).
pub fn polynomial_with_log_weights(log_w: &[f64], xi: &[Complex64]) -> Result<ComplexPolynomial> {
    if log_w.len() != xi.len() || xi.len() < 2 {
        return invalid("weights and coefficients must have equal length >= 2");
    }
    Ok(polynomial_from_logs(log_w, xi))
}

/// `K_m(z) = 1 + P_m(z) + z^{2m+1} conj(P_m(1/conj z)) + z^{2m+1}` from `xi_1..xi_m`.
pub fn sample_self_inversive_from_xi(
    profile: &CoefficientProfile,
    xi: &[Complex64],
) -> Result<ComplexPolynomial> {
    let m = xi.len();
    if m < 1 {
        return invalid("self-inversive polynomial needs m >= 1");
    }
    let deg = 2 * m + 1;
    let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
    c[0] = Complex64::new(1.0, 0.0);
    c[deg] = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        let v = xi[k - 1] * profile.b(k);
        c[k] = v;
        c[deg - k] = v.conj();
    }
    Ok(ComplexPolynomial::new(c))
}

pub fn sample_self_inversive(
    profile: &CoefficientProfile,
    law: &CoefficientLaw,
    m: usize,
    seed: SeedSpec,
) -> Result<ComplexPolynomial> {
    if m < 1 {
        return invalid("sample_self_inversive needs m >= 1");
    }
    sample_self_inversive_from_xi(profile, &draw_xi(law, m, seed))
}

/// Values of a truncated `P_inf` on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct PInftySample {
    pub trunc: usize,
    /// `sum_{k > trunc} b(k)^2 / sum_{k >= 0} b(k)^2`, bounded by the tail integral.
    pub tail_fraction: f64,
    pub values: Vec<Complex64>,
}

/// Largest truncation the tail rule may pick.
pub const MAX_TRUNC: usize = 1 << 22;

/// Smallest `T` (up to [`MAX_TRUNC`]) with `int_T^inf b^2 < 1e-8 sum_k b(k)^2`,
/// and the tail fraction it achieves.
pub fn p_infty_truncation(profile: &CoefficientProfile) -> Result<(usize, f64)> {
    if profile.phase() != PhaseClass::StrongCrystalline {
        return Err(Error::Domain(format!(
            "P_inf needs a strong crystalline profile, got {}",
            profile.phase()
        )));
    }
    let gamma = 2.0 * profile.alpha;
    let total = profile.b(0).powi(2) + profile.tail_sum(gamma);
    let frac = |t: usize| profile.tail_integral(gamma, t as f64) / total;
    let target = 1e-8;
    let mut hi = 2usize;
    while frac(hi) >= target {
        if hi >= MAX_TRUNC {
            return Ok((MAX_TRUNC, frac(MAX_TRUNC)));
        }
        hi = (hi * 2).min(MAX_TRUNC);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if frac(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, frac(hi)))
}

/// Evaluates `sum_{k=0}^{trunc} b(k) xi_k e^{i phi k}` at each angle with shared `xi`.
pub fn sample_p_infty_from_xi(
    profile: &CoefficientProfile,
    xi: &[Complex64],
    phis: &[f64],
) -> Vec<Complex64> {
    let p = ComplexPolynomial::new(
        xi.iter()
            .enumerate()
            .map(|(k, x)| x * profile.b(k))
            .collect(),
    );
    phis.iter()
        .map(|&phi| p.eval_unscaled(Complex64::from_polar(1.0, phi)))
        .collect()
}

pub fn sample_p_infty(
    profile: &CoefficientProfile,
    law: &CoefficientLaw,
    trunc: Option<usize>,
    phis: &[f64],
    seed: SeedSpec,
) -> Result<PInftySample> {
    let (auto, frac) = p_infty_truncation(profile)?;
    let trunc = trunc.unwrap_or(auto);
    let tail_fraction = if trunc == auto {
        frac
    } else {
        let total = profile.b(0).powi(2) + profile.tail_sum(2.0 * profile.alpha);
        profile.tail_integral(2.0 * profile.alpha, trunc as f64) / total
    };
    let xi = draw_xi(law, trunc + 1, seed);
    let values = sample_p_infty_from_xi(profile, &xi, phis);
    Ok(PInftySample {
        trunc,
        tail_fraction,
        values,
    })
}

fn on_real_axis_angle(psi: f64) -> bool {
    let r = psi.rem_euclid(PI);
    r < 1e-12 || PI - r < 1e-12
}

/// Discretised `G_psi(u) = int_0^1 t^alpha e^{u t} dB(t)` at each `u`.
///
/// Cells are uniform with midpoint nodes; for `alpha < 0` the first cell's
/// weight is matched to the exact `int_0^{dt} t^{2 alpha} dt`.
pub fn sample_gaf(
    alpha: f64,
    law: &CoefficientLaw,
    psi: f64,
    u_grid: &[Complex64],
    n_disc: usize,
    seed: SeedSpec,
) -> Result<Vec<Complex64>> {
    if !(alpha > -0.5) {
        return invalid(format!("sample_gaf needs alpha > -1/2, got {alpha}"));
    }
    if n_disc < 100 {
        return invalid("sample_gaf needs n_disc >= 100");
    }
    let (s1, s2) = if on_real_axis_angle(psi) {
        law.component_sigmas()
    } else {
        let s = law.variance().sqrt() / SQRT_2;
        (s, s)
    };
    let dt = 1.0 / n_disc as f64;
    let sq = dt.sqrt();
    let mut rng = seed.rng();
    let mut nodes = Vec::with_capacity(n_disc);
    let mut incs = Vec::with_capacity(n_disc);
    for j in 0..n_disc {
        let t = (j as f64 + 0.5) * dt;
        let w = if j == 0 && alpha < 0.0 {
            (dt.powf(2.0 * alpha) / (2.0 * alpha + 1.0)).sqrt()
        } else {
            t.powf(alpha)
        };
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        nodes.push(t);
        incs.push(Complex64::new(s1 * x, s2 * y) * (w * sq));
    }
    Ok(u_grid
        .iter()
        .map(|&u| {
            let step = (u * dt).exp();
            let mut e = (u * (0.5 * dt)).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, inc) in incs.iter().enumerate() {
                if j % 64 == 0 {
                    e = (u * nodes[j]).exp();
                }
                acc += inc * e;
                e *= step;
            }
            acc
        })
        .collect())
}

/// Haar-distributed unitary matrix: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(n: usize, seed: SeedSpec) -> Result<DMatrix<Complex64>> {
    if n < 1 {
        return invalid("haar_unitary needs n >= 1");
    }
    let mut rng = seed.rng();
    let g = DMatrix::from_fn(n, n, |_, _| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex64::new(x, y) / SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

/// `max |(U^* U - I)_{ij}|`.
pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { p[(i, j)] - 1.0 } else { p[(i, j)] };
            worst = worst.max(e.norm());
        }
    }
    worst
}

/// `Tr(U^k)` for `k = 1..=k_max`, the Taylor data of `log det(I - zU)`.
pub fn haar_log_charpoly(n: usize, k_max: usize, seed: SeedSpec) -> Result<Vec<Complex64>> {
    if k_max < 1 || k_max > n {
        return invalid(format!(
            "haar traces need 1 <= k_max <= n, got k_max = {k_max}, n = {n}"
        ));
    }
    let u = haar_unitary(n, seed)?;
    let mut pow = u.clone();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > 1 {
            pow = &pow * &u;
        }
        out.push(pow.trace());
    }
    Ok(out)
}

/// `sum_k |c_k|^2`, compensated.
pub fn coefficient_energy(p: &ComplexPolynomial) -> f64 {
    let mut acc = KahanSum::new();
    for c in &p.coeffs {
        acc.add(c.norm_sqr());
    }
    acc.value() * (2.0 * p.log_scale).exp()
}
