//! Zeros of polynomials and of analytic functions on rectangles.
//!
//! [`polynomial_zeros`] runs Aberth-Ehrlich iteration in Gauss-Seidel order,
//! seeded on Newton-polygon circles, with a balanced companion-matrix retry.
//! [`window_zeros`] localises zeros of an analytic function by winding
//! numbers on a quadtree and refines them with Newton steps.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ensembles::ComplexPolynomial;
use crate::{invalid, Error, Result};

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootConfig {
    pub max_iters: usize,
    /// Bound on the backward error `|p(z)| / sum_k |c_k| |z|^k`.
    pub tol: f64,
    /// Retry with the companion matrix when Aberth leaves roots unconverged.
    pub fallback: bool,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            max_iters: 400,
            tol: 1e-12,
            fallback: true,
        }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return invalid("root config needs tol > 0 and max_iters >= 1");
        }
        Ok(())
    }
}

/// Zeros with per-zero residuals and convergence flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub diagnostic: Option<String>,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    fn push(&mut self, z: Complex64, residual: f64, converged: bool) {
        self.zeros.push(z);
        self.residuals.push(residual);
        self.converged.push(converged);
    }

    /// CSV with columns `re,im,residual,converged`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,residual,converged")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.zeros[i].re, self.zeros[i].im, self.residuals[i], self.converged[i]
            )?;
        }
        Ok(())
    }
}

/// Backward error `|p(z)| / sum_k |c_k| |z|^k`.
pub fn scaled_residual(p: &ComplexPolynomial, z: Complex64) -> f64 {
    let scale = p.abs_scale(z);
    if scale == 0.0 {
        return 0.0;
    }
    if !scale.is_finite() {
        let w = Complex64::new(1.0, 0.0) / z;
        let rev: Vec<Complex64> = p.coeffs.iter().rev().cloned().collect();
        let q = ComplexPolynomial::new(rev);
        return q.eval_unscaled(w).norm() / q.abs_scale(w);
    }
    p.eval_unscaled(z).norm() / scale
}

/// Working copy of a polynomial with `a_0 != 0`, `a_d != 0`, `max |a_k| = 1`.
struct Work {
    re: Vec<f64>,
    im: Vec<f64>,
    abs: Vec<f64>,
}

struct Newton {
    /// `p / p'`.
    ratio: Complex64,
    backward_error: f64,
    /// Horner rounding-noise level relative to the same scale.
    noise: f64,
}

impl Work {
    fn new(c: &[Complex64]) -> Self {
        let m = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        Self {
            re: c.iter().map(|x| x.re / m).collect(),
            im: c.iter().map(|x| x.im / m).collect(),
            abs: c.iter().map(|x| x.norm() / m).collect(),
        }
    }

    fn degree(&self) -> usize {
        self.re.len() - 1
    }

    /// Horner for `p`, `p'` and a running error bound; reversed for `|z| > 1`.
    fn newton(&self, z: Complex64) -> Newton {
        let d = self.degree();
        let r = z.norm();
        let reversed = r > 1.0;
        let x = if reversed {
            Complex64::new(1.0, 0.0) / z
        } else {
            z
        };
        let (xr, xi) = (x.re, x.im);
        let ax = x.norm();
        let (mut pr, mut pi, mut dr, mut di) = (0.0, 0.0, 0.0, 0.0);
        let mut scale = 0.0;
        let mut mu = 0.0;
        for j in 0..=d {
            let k = if reversed { j } else { d - j };
            // d = d*x + p ; p = p*x + a_k
            let ndr = dr * xr - di * xi + pr;
            let ndi = dr * xi + di * xr + pi;
            dr = ndr;
            di = ndi;
            let npr = pr * xr - pi * xi + self.re[k];
            let npi = pr * xi + pi * xr + self.im[k];
            pr = npr;
            pi = npi;
            scale = scale * ax + self.abs[k];
            mu = mu * ax + (pr * pr + pi * pi).sqrt();
        }
        let p = Complex64::new(pr, pi);
        let dp = Complex64::new(dr, di);
        let ratio = if reversed {
            // p(z) = z^d R(w), p'(z) = z^{d-1}(d R - w R')
            let den = p * d as f64 - x * dp;
            z * p / den
        } else {
            p / dp
        };
        let pn = p.norm();
        Newton {
            ratio,
            backward_error: pn / scale,
            noise: 4.0 * EPS * mu / scale,
        }
    }
}

/// Upper convex hull of `(k, log|a_k|)` and the circle radii it implies.
fn newton_polygon_radii(abs: &[f64]) -> Vec<(usize, f64)> {
    let pts: Vec<(usize, f64)> = abs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(k, a)| (k, a.ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            // Remove the middle point when it lies on or below the chord.
            let cross = (k2 as f64 - k1 as f64) * (p.1 - l1) - (l2 - l1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| {
            let (i, li) = w[0];
            let (j, lj) = w[1];
            (j - i, ((li - lj) / (j - i) as f64).exp())
        })
        .collect()
}

fn jitter(i: usize) -> f64 {
    let mut x = (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5851_f42d_4c95_7f2d;
    x ^= x >> 29;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 32;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

fn initial_guesses(w: &Work) -> Vec<Complex64> {
    let d = w.degree();
    let mut out = Vec::with_capacity(d);
    for (e, (count, radius)) in newton_polygon_radii(&w.abs).into_iter().enumerate() {
        let offset = 2.0 * PI * (0.1 + 0.37 * e as f64);
        for m in 0..count {
            let idx = out.len();
            let theta = offset + 2.0 * PI * (m as f64 + 0.25 * jitter(idx)) / count as f64;
            out.push(Complex64::from_polar(radius, theta));
        }
    }
    out
}

/// Aberth iteration on `w`; returns zeros, residuals and flags.
fn aberth(w: &Work, cfg: &RootConfig) -> (Vec<Complex64>, Vec<f64>, Vec<bool>) {
    let d = w.degree();
    let z0 = initial_guesses(w);
    let mut zr: Vec<f64> = z0.iter().map(|z| z.re).collect();
    let mut zi: Vec<f64> = z0.iter().map(|z| z.im).collect();
    let mut frozen = vec![false; d];
    let mut active = d;
    for _ in 0..cfg.max_iters {
        if active == 0 {
            break;
        }
        for i in 0..d {
            if frozen[i] {
                continue;
            }
            let z = Complex64::new(zr[i], zi[i]);
            let nw = w.newton(z);
            if !nw.ratio.re.is_finite() || !nw.ratio.im.is_finite() {
                // Hit a point with p' = 0; nudge and retry next sweep.
                zr[i] += 1e-7 * (1.0 + z.norm()) * (jitter(i) - 0.5);
                zi[i] += 1e-7 * (1.0 + z.norm()) * (jitter(i + d) - 0.5);
                continue;
            }
            if nw.backward_error <= nw.noise {
                frozen[i] = true;
                active -= 1;
                continue;
            }
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..d {
                if j == i {
                    continue;
                }
                let dx = zr[i] - zr[j];
                let dy = zi[i] - zi[j];
                let inv = 1.0 / (dx * dx + dy * dy);
                sr += dx * inv;
                si -= dy * inv;
            }
            let n = nw.ratio;
            let den = Complex64::new(1.0, 0.0) - n * Complex64::new(sr, si);
            let step = n / den;
            let step = if step.re.is_finite() && step.im.is_finite() {
                step
            } else {
                n
            };
            zr[i] -= step.re;
            zi[i] -= step.im;
            if step.norm() <= 2.0 * EPS * z.norm() {
                frozen[i] = true;
                active -= 1;
            }
        }
    }
    let zeros: Vec<Complex64> = zr
        .iter()
        .zip(&zi)
        .map(|(a, b)| Complex64::new(*a, *b))
        .collect();
    let mut res = Vec::with_capacity(d);
    let mut conv = Vec::with_capacity(d);
    for z in &zeros {
        let be = w.newton(*z).backward_error;
        res.push(be);
        conv.push(be.is_finite() && be <= cfg.tol);
    }
    (zeros, res, conv)
}

/// Diagonal similarity scaling that equalises row and column norms.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn newton_polish(w: &Work, z: Complex64, steps: usize) -> Complex64 {
    let mut z = z;
    for _ in 0..steps {
        let nw = w.newton(z);
        if nw.backward_error <= nw.noise || !nw.ratio.re.is_finite() || !nw.ratio.im.is_finite() {
            break;
        }
        z -= nw.ratio;
    }
    z
}

fn companion(w: &Work, cfg: &RootConfig) -> Result<(Vec<Complex64>, Vec<f64>, Vec<bool>)> {
    let d = w.degree();
    let lead = Complex64::new(w.re[d], w.im[d]);
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        m[(0, j)] = -Complex64::new(w.re[d - 1 - j], w.im[d - 1 - j]) / lead;
    }
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut m);
    let schur = m
        .try_schur(EPS, 100 * d.max(10))
        .ok_or_else(|| Error::Numerical("companion Schur iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("companion eigenvalues unavailable".into()))?;
    let mut zeros = Vec::with_capacity(d);
    let mut res = Vec::with_capacity(d);
    let mut conv = Vec::with_capacity(d);
    for z in eig.iter() {
        let z = newton_polish(w, *z, 10);
        let be = w.newton(z).backward_error;
        zeros.push(z);
        res.push(be);
        conv.push(be.is_finite() && be <= cfg.tol);
    }
    Ok((zeros, res, conv))
}

/// Companion-matrix zeros of `p`, for cross-checks and as the fallback path.
pub fn companion_zeros(p: &ComplexPolynomial, cfg: &RootConfig) -> Result<ZeroSet> {
    solve(p, cfg, true)
}

/// All zeros of `p`, one entry per degree.
pub fn polynomial_zeros(p: &ComplexPolynomial, cfg: &RootConfig) -> Result<ZeroSet> {
    solve(p, cfg, false)
}

fn solve(p: &ComplexPolynomial, cfg: &RootConfig, companion_only: bool) -> Result<ZeroSet> {
    cfg.validate()?;
    let d = p.degree();
    if d < 1 {
        return invalid("polynomial_zeros needs degree >= 1");
    }
    if p.coeffs
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return invalid("polynomial has non-finite coefficients");
    }
    let low = p
        .coeffs
        .iter()
        .position(|c| *c != Complex64::new(0.0, 0.0))
        .unwrap_or(0);
    let mut out = ZeroSet::default();
    for _ in 0..low {
        out.push(Complex64::new(0.0, 0.0), 0.0, true);
    }
    let core = &p.coeffs[low..=d];
    if core.len() == 1 {
        return Ok(out);
    }
    let w = Work::new(core);
    if core.len() == 2 {
        let z = -Complex64::new(w.re[0], w.im[0]) / Complex64::new(w.re[1], w.im[1]);
        out.push(z, w.newton(z).backward_error, true);
        return Ok(out);
    }
    let (zeros, res, conv) = if companion_only {
        companion(&w, cfg)?
    } else {
        let first = aberth(&w, cfg);
        if first.2.iter().all(|c| *c) || !cfg.fallback {
            first
        } else {
            match companion(&w, cfg) {
                Ok(second)
                    if second.2.iter().filter(|c| **c).count()
                        > first.2.iter().filter(|c| **c).count() =>
                {
                    out.diagnostic =
                        Some("aberth did not converge; companion-matrix fallback used".into());
                    second
                }
                _ => first,
            }
        }
    };
    let failed = conv.iter().filter(|c| !**c).count();
    if failed > 0 {
        out.diagnostic = Some(format!(
            "{failed} of {} zeros did not reach the residual tolerance",
            zeros.len()
        ));
    }
    for i in 0..zeros.len() {
        out.push(zeros[i], res[i], conv[i]);
    }
    Ok(out)
}

/// Relative condition number `sum |c_k| |z|^k / (|z| |p'(z)|)` of a simple zero.
pub fn root_condition(p: &ComplexPolynomial, z: Complex64) -> f64 {
    let (_, d) = p.eval_with_derivative(z);
    let scale = p.abs_scale(z);
    let den = z.norm() * d.norm();
    if den == 0.0 {
        f64::INFINITY
    } else {
        scale / den
    }
}

/// `max(1e-9, 10 n eps max(1, kappa_max))`.
pub fn default_tol_circle(p: &ComplexPolynomial, zs: &ZeroSet) -> f64 {
    let n = p.degree() as f64;
    let kappa = zs
        .zeros
        .iter()
        .map(|z| root_condition(p, *z))
        .filter(|k| k.is_finite())
        .fold(1.0, f64::max);
    (10.0 * n * EPS * kappa).max(1e-9)
}

/// Result of [`count_on_unit_circle`].
#[derive(Clone, Debug, PartialEq)]
pub struct CircleCount {
    /// Zeros on the unit circle.
    pub nu: usize,
    /// Zeros with `| log|z| | <= tol_circle`.
    pub threshold_count: usize,
    /// Off-threshold zeros with no partner but `|z - 1/conj z| <= 1e-6`,
    /// counted as circle zeros.
    pub reclassified: usize,
    pub unmatched: usize,
    pub pairing_ok: bool,
    pub tol_circle: f64,
}

const PAIR_TOL: f64 = 1e-6;

/// Counts circle zeros and cross-checks the rest against `z <-> 1/conj z` pairing.
pub fn count_on_unit_circle(zs: &ZeroSet, tol_circle: f64) -> CircleCount {
    let mut off = Vec::new();
    let mut on = 0;
    for z in &zs.zeros {
        if z.norm().ln().abs() <= tol_circle {
            on += 1;
        } else {
            off.push(*z);
        }
    }
    let mut used = vec![false; off.len()];
    let mut reclassified = 0;
    let mut unmatched = 0;
    for i in 0..off.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let image = Complex64::new(1.0, 0.0) / off[i].conj();
        let tol = PAIR_TOL * off[i].norm().max(1.0 / off[i].norm()).max(1.0);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..off.len() {
            if used[j] {
                continue;
            }
            let dist = (off[j] - image).norm();
            if dist <= tol && best.is_none_or(|(_, b)| dist < b) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, _)) => used[j] = true,
            None if (off[i] - image).norm() <= tol => reclassified += 1,
            None => unmatched += 1,
        }
    }
    CircleCount {
        nu: on + reclassified,
        threshold_count: on,
        reclassified,
        unmatched,
        pairing_ok: unmatched == 0,
        tol_circle,
    }
}

/// An analytic function with its derivative.
pub trait AnalyticFunction {
    fn eval(&self, u: Complex64) -> (Complex64, Complex64);
}

impl<F: Fn(Complex64) -> (Complex64, Complex64)> AnalyticFunction for F {
    fn eval(&self, u: Complex64) -> (Complex64, Complex64) {
        self(u)
    }
}

impl AnalyticFunction for ComplexPolynomial {
    fn eval(&self, u: Complex64) -> (Complex64, Complex64) {
        self.eval_with_derivative(u)
    }
}

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max)
            || ![re_min, re_max, im_min, im_max]
                .iter()
                .all(|v| v.is_finite())
        {
            return invalid("rectangle needs finite bounds with min < max");
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }
}

/// Boundary came within `1e-9` of a zero.
struct BoundaryHit;

struct Winding {
    turns: i64,
    max_abs: f64,
}

fn segment_turns<F: AnalyticFunction + ?Sized>(
    f: &F,
    a: Complex64,
    fa: (Complex64, Complex64),
    b: Complex64,
    fb: (Complex64, Complex64),
    depth: usize,
    max_abs: &mut f64,
) -> std::result::Result<f64, BoundaryHit> {
    let h = (b - a).norm();
    let da = (fa.0 / fa.1).norm();
    let db = (fb.0 / fb.1).norm();
    if da < 1e-9 || db < 1e-9 || fa.0.norm() == 0.0 || fb.0.norm() == 0.0 {
        return Err(BoundaryHit);
    }
    let delta = (fb.0 / fa.0).arg();
    let rate = ((fa.1 / fa.0).norm() + (fb.1 / fb.0).norm()) * 0.5 * h;
    if delta.abs() <= 0.5 && rate <= 1.0 {
        return Ok(delta);
    }
    if depth > 60 {
        return Err(BoundaryHit);
    }
    let m = (a + b) * 0.5;
    let fm = f.eval(m);
    *max_abs = max_abs.max(fm.0.norm());
    Ok(segment_turns(f, a, fa, m, fm, depth + 1, max_abs)?
        + segment_turns(f, m, fm, b, fb, depth + 1, max_abs)?)
}

fn winding<F: AnalyticFunction + ?Sized>(
    f: &F,
    rect: &Rect,
) -> std::result::Result<Winding, BoundaryHit> {
    let c = rect.corners();
    let mut total = 0.0;
    let mut max_abs: f64 = 0.0;
    for e in 0..4 {
        let (a, b) = (c[e], c[(e + 1) % 4]);
        let pieces = 16;
        let mut prev = a;
        let mut fprev = f.eval(a);
        max_abs = max_abs.max(fprev.0.norm());
        for s in 1..=pieces {
            let t = s as f64 / pieces as f64;
            let x = a + (b - a) * t;
            let fx = f.eval(x);
            max_abs = max_abs.max(fx.0.norm());
            total += segment_turns(f, prev, fprev, x, fx, 0, &mut max_abs)?;
            prev = x;
            fprev = fx;
        }
    }
    let w = total / (2.0 * PI);
    let turns = w.round();
    if (w - turns).abs() > 0.1 {
        return Err(BoundaryHit);
    }
    Ok(Winding {
        turns: turns as i64,
        max_abs,
    })
}

/// Number of zeros of `f` inside `rect` by the argument principle.
pub fn winding_number<F: AnalyticFunction + ?Sized>(f: &F, rect: &Rect) -> Result<i64> {
    winding(f, rect)
        .map(|w| w.turns)
        .map_err(|_| Error::Numerical("zero on or near the rectangle boundary".into()))
}

fn jittered(rect: &Rect, attempt: usize) -> Rect {
    if attempt == 0 {
        return *rect;
    }
    let e = 1e-7 * rect.diameter() * (attempt as f64);
    let s = |i: usize| jitter(attempt * 4 + i) - 0.5;
    Rect {
        re_min: rect.re_min + e * s(0),
        re_max: rect.re_max + e * s(1),
        im_min: rect.im_min + e * s(2),
        im_max: rect.im_max + e * s(3),
    }
}

fn newton_in_rect<F: AnalyticFunction + ?Sized>(
    f: &F,
    rect: &Rect,
    start: Complex64,
) -> Option<Complex64> {
    let mut z = start;
    let slack = 1e-9 * rect.diameter();
    for _ in 0..100 {
        let (v, d) = f.eval(z);
        if v.norm() == 0.0 {
            return Some(z);
        }
        let step = v / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() <= 4.0 * EPS * z.norm().max(1e-300) + 1e-300 {
            break;
        }
    }
    let grown = Rect {
        re_min: rect.re_min - slack,
        re_max: rect.re_max + slack,
        im_min: rect.im_min - slack,
        im_max: rect.im_max + slack,
    };
    grown.contains(z).then_some(z)
}

/// Splits `rect` into four children at a slightly offset midpoint.
fn children(rect: &Rect, attempt: usize) -> [Rect; 4] {
    let fx = 0.5 + 0.01 * (jitter(2 * attempt + 11) - 0.5) * attempt as f64;
    let fy = 0.5 + 0.01 * (jitter(2 * attempt + 12) - 0.5) * attempt as f64;
    let mx = rect.re_min + fx * (rect.re_max - rect.re_min);
    let my = rect.im_min + fy * (rect.im_max - rect.im_min);
    [
        Rect {
            re_min: rect.re_min,
            re_max: mx,
            im_min: rect.im_min,
            im_max: my,
        },
        Rect {
            re_min: mx,
            re_max: rect.re_max,
            im_min: rect.im_min,
            im_max: my,
        },
        Rect {
            re_min: rect.re_min,
            re_max: mx,
            im_min: my,
            im_max: rect.im_max,
        },
        Rect {
            re_min: mx,
            re_max: rect.re_max,
            im_min: my,
            im_max: rect.im_max,
        },
    ]
}

#[allow(clippy::too_many_arguments)]
fn refine<F: AnalyticFunction + ?Sized>(
    f: &F,
    rect: &Rect,
    turns: i64,
    scale: f64,
    tol: f64,
    min_size: f64,
    depth: usize,
    out: &mut ZeroSet,
) -> Result<()> {
    if turns == 0 {
        return Ok(());
    }
    if turns == 1 {
        if let Some(z) = newton_in_rect(f, rect, rect.center()) {
            if rect.contains(z) {
                let r = f.eval(z).0.norm() / scale;
                out.push(z, r, r <= tol);
                return Ok(());
            }
        }
    }
    if rect.diameter() <= min_size || depth > 200 {
        // Cluster below resolution: report the centre with its multiplicity.
        let z = newton_in_rect(f, rect, rect.center()).unwrap_or(rect.center());
        let r = f.eval(z).0.norm() / scale;
        for _ in 0..turns {
            out.push(z, r, false);
        }
        out.diagnostic = Some(format!("unresolved cluster of {turns} zeros near {z}"));
        return Ok(());
    }
    for attempt in 0..6 {
        let kids = children(rect, attempt);
        let mut counts = [0i64; 4];
        let mut ok = true;
        for (i, k) in kids.iter().enumerate() {
            match winding(f, k) {
                Ok(w) => counts[i] = w.turns,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if counts.iter().sum::<i64>() != turns {
            continue;
        }
        for (i, k) in kids.iter().enumerate() {
            refine(f, k, counts[i], scale, tol, min_size, depth + 1, out)?;
        }
        return Ok(());
    }
    Err(Error::Numerical(format!(
        "winding mismatch while subdividing {rect:?}"
    )))
}

/// Zeros of `f` inside `rect`; the count equals the winding number of `rect`.
pub fn window_zeros<F: AnalyticFunction + ?Sized>(
    f: &F,
    rect: &Rect,
    cfg: &RootConfig,
) -> Result<ZeroSet> {
    cfg.validate()?;
    let mut chosen = None;
    for attempt in 0..6 {
        let r = jittered(rect, attempt);
        if let Ok(w) = winding(f, &r) {
            chosen = Some((r, w));
            break;
        }
    }
    let (r, w) = chosen
        .ok_or_else(|| Error::Numerical("zero on the rectangle boundary after 5 jitters".into()))?;
    let mut out = ZeroSet::default();
    let scale = w.max_abs.max(f64::MIN_POSITIVE);
    refine(
        f,
        &r,
        w.turns,
        scale,
        cfg.tol,
        1e-10 * r.diameter(),
        0,
        &mut out,
    )?;
    if out.len() as i64 != w.turns {
        return Err(Error::Numerical(format!(
            "found {} zeros but winding number is {}",
            out.len(),
            w.turns
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_polynomial, sample_self_inversive, CoefficientLaw, SeedSpec};
    use crate::profiles::CoefficientProfile;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(v: &[f64]) -> ComplexPolynomial {
        ComplexPolynomial::new(v.iter().map(|x| c(*x, 0.0)).collect())
    }

    fn sorted(mut z: Vec<Complex64>) -> Vec<Complex64> {
        z.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        z
    }

    /// Largest distance in a greedy nearest matching of two multisets.
    fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn quadratic() {
        let zs = polynomial_zeros(&poly(&[-1.0, 0.0, 1.0]), &RootConfig::default()).unwrap();
        let z = sorted(zs.zeros);
        assert!((z[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((z[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let mut v = vec![0.0; 65];
        v[0] = -1.0;
        v[64] = 1.0;
        let zs = polynomial_zeros(&poly(&v), &RootConfig::default()).unwrap();
        assert_eq!(zs.len(), 64);
        assert!(zs.all_converged());
        let exact: Vec<Complex64> = (0..64)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0))
            .collect();
        assert!(match_distance(&zs.zeros, &exact) < 1e-10);
    }

    #[test]
    fn zeros_at_origin_and_linear() {
        let zs = polynomial_zeros(&poly(&[0.0, 0.0, 2.0, 1.0]), &RootConfig::default()).unwrap();
        assert_eq!(zs.len(), 3);
        assert_eq!(zs.zeros.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(zs.zeros.iter().any(|z| (z - c(-2.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn kac_thousand() {
        let p = sample_polynomial(
            &CoefficientProfile::power(0.0),
            &CoefficientLaw::isotropic(1.0).unwrap(),
            1000,
            SeedSpec::new(2024, 0),
        )
        .unwrap();
        let zs = polynomial_zeros(&p, &RootConfig::default()).unwrap();
        assert_eq!(zs.len(), 1000);
        assert!(zs.all_converged());
        let worst = zs
            .zeros
            .iter()
            .map(|z| scaled_residual(&p, *z))
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let band = 5.0 * 1000f64.ln() / 1000.0;
        let near = zs
            .zeros
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() < band)
            .count();
        assert!(near as f64 > 0.95 * 1000.0);
    }

    #[test]
    fn newton_polish_is_stable() {
        let p = sample_polynomial(
            &CoefficientProfile::power(-2.0),
            &CoefficientLaw::isotropic(1.0).unwrap(),
            300,
            SeedSpec::new(5, 1),
        )
        .unwrap();
        let zs = polynomial_zeros(&p, &RootConfig::default()).unwrap();
        assert!(zs.all_converged());
        for z in &zs.zeros {
            let mut y = *z;
            for _ in 0..20 {
                let (v, d) = p.eval_with_derivative(y);
                if v.norm() == 0.0 {
                    break;
                }
                y -= v / d;
            }
            assert!((y - z).norm() < 1e-10, "{z} moved to {y}");
        }
    }

    #[test]
    fn aberth_agrees_with_companion() {
        let law = CoefficientLaw::isotropic(1.0).unwrap();
        for s in 0..20 {
            let p = sample_polynomial(
                &CoefficientProfile::power(0.5),
                &law,
                30,
                SeedSpec::new(17, s),
            )
            .unwrap();
            let a = polynomial_zeros(&p, &RootConfig::default()).unwrap();
            let b = companion_zeros(&p, &RootConfig::default()).unwrap();
            assert!(match_distance(&a.zeros, &b.zeros) < 1e-8, "seed {s}");
        }
    }

    #[test]
    fn cyclotomic_and_cube_roots_on_circle() {
        let zs = polynomial_zeros(&poly(&[1.0, 0.0, 0.0, 1.0]), &RootConfig::default()).unwrap();
        assert_eq!(count_on_unit_circle(&zs, 1e-9).nu, 3);
        let p5 = poly(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        let zs = polynomial_zeros(&p5, &RootConfig::default()).unwrap();
        let cc = count_on_unit_circle(&zs, default_tol_circle(&p5, &zs));
        assert_eq!(cc.nu, 4);
        assert!(cc.pairing_ok);
    }

    #[test]
    fn self_inversive_pairing() {
        let prof = CoefficientProfile::power(0.0);
        let law = CoefficientLaw::isotropic(1.0).unwrap();
        let k = sample_self_inversive(&prof, &law, 200, SeedSpec::new(3, 3)).unwrap();
        let zs = polynomial_zeros(&k, &RootConfig::default()).unwrap();
        assert_eq!(zs.len(), 401);
        let images: Vec<Complex64> = zs.zeros.iter().map(|z| c(1.0, 0.0) / z.conj()).collect();
        assert!(match_distance(&zs.zeros, &images) < 1e-6);
        let cc = count_on_unit_circle(&zs, default_tol_circle(&k, &zs));
        assert!(cc.pairing_ok);
        assert!((cc.nu + 401).is_multiple_of(2), "off-circle zeros come in pairs");
    }

    #[test]
    fn exp_minus_one_window() {
        let f = |u: Complex64| (u.exp() - 1.0, u.exp());
        let rect = Rect::new(-1.0, 1.0, -7.0, 7.0).unwrap();
        let zs = window_zeros(&f, &rect, &RootConfig::default()).unwrap();
        let z = sorted(zs.zeros.clone());
        assert_eq!(z.len(), 3);
        let mut want = vec![c(0.0, -2.0 * PI), c(0.0, 0.0), c(0.0, 2.0 * PI)];
        want = sorted(want);
        assert!(match_distance(&z, &want) < 1e-12);
        assert!(zs.all_converged());
    }

    #[test]
    fn lattice_window() {
        // N-hat + e^u N with N-hat = 1, N = -1.
        let f = |u: Complex64| (1.0 - u.exp(), -u.exp());
        let rect = Rect::new(-2.0, 2.0, -10.0, 20.0).unwrap();
        let zs = window_zeros(&f, &rect, &RootConfig::default()).unwrap();
        assert_eq!(zs.len(), 5);
        for z in &zs.zeros {
            assert!(z.re.abs() < 1e-12);
            let k = z.im / (2.0 * PI);
            assert!((k - k.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_window() {
        let f = |u: Complex64| (1.0 + u.exp() / 10.0, u.exp() / 10.0);
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(window_zeros(&f, &rect, &RootConfig::default())
            .unwrap()
            .is_empty());
        assert_eq!(winding_number(&f, &rect).unwrap(), 0);
    }

    #[test]
    fn window_against_grid_minima() {
        let p = sample_polynomial(
            &CoefficientProfile::power(0.0),
            &CoefficientLaw::isotropic(1.0).unwrap(),
            40,
            SeedSpec::new(8, 8),
        )
        .unwrap();
        let rect = Rect::new(-1.2, 1.2, -1.2, 1.2).unwrap();
        let zs = window_zeros(&p, &rect, &RootConfig::default()).unwrap();
        let all = polynomial_zeros(&p, &RootConfig::default()).unwrap();
        let inside: Vec<Complex64> = all
            .zeros
            .iter()
            .cloned()
            .filter(|z| rect.contains(*z))
            .collect();
        assert_eq!(zs.len(), inside.len());
        assert!(match_distance(&zs.zeros, &inside) < 1e-9);
        // Every reported zero sits within one cell of a discrete local minimum of |f|.
        let g = 400;
        let h = 2.4 / g as f64;
        let at = |i: usize, j: usize| {
            p.eval_unscaled(c(-1.2 + (i as f64 + 0.5) * h, -1.2 + (j as f64 + 0.5) * h))
                .norm()
        };
        let mut minima = Vec::new();
        for i in 1..g - 1 {
            for j in 1..g - 1 {
                let v = at(i, j);
                if v <= at(i - 1, j) && v <= at(i + 1, j) && v <= at(i, j - 1) && v <= at(i, j + 1)
                {
                    minima.push(c(-1.2 + (i as f64 + 0.5) * h, -1.2 + (j as f64 + 0.5) * h));
                }
            }
        }
        for z in &zs.zeros {
            if z.re.abs() < 1.2 - 2.0 * h && z.im.abs() < 1.2 - 2.0 * h {
                assert!(minima.iter().any(|m| (m - z).norm() <= 2.0 * h), "{z}");
            }
        }
    }

    #[test]
    fn csv_layout() {
        let zs = polynomial_zeros(&poly(&[-1.0, 0.0, 1.0]), &RootConfig::default()).unwrap();
        let mut buf = Vec::new();
        zs.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("re,im,residual,converged\n"));
        assert_eq!(s.lines().count(), 3);
    }
}
