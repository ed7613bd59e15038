//! Seeded Monte Carlo experiments over the polynomial ensembles.
//!
//! Trial `i` draws from stream `i` of the master seed, trials fan out over
//! rayon and are collected in trial order, and every reduction is a pairwise
//! sum over that order. A summary therefore does not depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::{
    draw_xi, haar_log_charpoly, p_infty_truncation, sample_gaf, sample_p_infty_from_xi,
    sample_polynomial_from_xi, sample_self_inversive_from_xi, CoefficientLaw, ComplexPolynomial,
    SeedSpec,
};
use crate::profiles::{CoefficientProfile, PhaseClass};
use crate::roots::{
    count_on_unit_circle, default_tol_circle, polynomial_zeros, winding_number, Rect, RootConfig,
    ZeroSet,
};
use crate::scaling::{make_window, ScalingWindow};
use crate::sum::pairwise_sum;
use crate::theory;
use crate::{invalid, Error, Result};

/// z-scores beyond this are treated as disagreement.
pub const Z_THRESHOLD: f64 = 4.0;
/// Fraction of failed trials above which an experiment aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;
/// Default Im-u extent of a window: five lattice periods.
pub const DEFAULT_WINDOW_HEIGHT: f64 = 10.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    AnnulusCount,
    WindowProcess,
    SpacingStats,
    SelfInversiveFraction,
    CircleCountingMeasure,
    HaarTraceMoments,
    OutsideDiskUniversality,
    StrongWeakCrossoverCLT,
    SelfInversiveRealZeros,
}

/// One experiment. Unused kind-specific fields are ignored; missing ones take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub profile: CoefficientProfile,
    pub law: CoefficientLaw,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Annulus in window coordinates `s1 < Re u < s2`.
    #[serde(default)]
    pub s1: Option<f64>,
    #[serde(default)]
    pub s2: Option<f64>,
    /// Window angles; two or more turn on the cross-window correlation.
    #[serde(default)]
    pub psi: Vec<f64>,
    /// `[re_min, re_max, im_min, im_max]` in window coordinates.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    #[serde(default)]
    pub bins: Option<usize>,
    /// Whether window experiments solve for zeros and build a histogram.
    #[serde(default)]
    pub histogram: Option<bool>,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub truncation: Option<usize>,
    /// Profile exponents for sweeps; the slow part and sigma come from `profile`.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Radii `[r1, r2]` of the outside-disk annulus.
    #[serde(default)]
    pub radii: Option<[f64; 2]>,
    /// Half-width, in units of `1/n`, of the band around `r_n` for spacing statistics.
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Brownian cells for GAF comparison samples.
    #[serde(default)]
    pub n_disc: Option<usize>,
}

impl ExperimentConfig {
    /// Config with every optional field unset.
    pub fn new(
        kind: ExperimentKind,
        profile: CoefficientProfile,
        law: CoefficientLaw,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            kind,
            profile,
            law,
            n: None,
            m: None,
            trials,
            master_seed,
            s1: None,
            s2: None,
            psi: Vec::new(),
            window: None,
            bins: None,
            histogram: None,
            k_max: None,
            truncation: None,
            alphas: Vec::new(),
            radii: None,
            band: None,
            t_max: None,
            n_disc: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// First 16 hex digits of SHA-256 over the compact JSON form.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(self).unwrap_or_default();
        let d = Sha256::digest(s.as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn need_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            _ => invalid(format!("{:?} needs n >= 1", self.kind)),
        }
    }

    fn need_m(&self) -> Result<usize> {
        match self.m {
            Some(m) if m >= 1 => Ok(m),
            _ => invalid(format!("{:?} needs m >= 1", self.kind)),
        }
    }

    fn annulus(&self) -> Result<(f64, f64)> {
        let (s1, s2) = (self.s1.unwrap_or(-1.0), self.s2.unwrap_or(1.0));
        if !(s1 < s2) {
            return invalid(format!("annulus needs s1 < s2, got ({s1}, {s2})"));
        }
        Ok((s1, s2))
    }

    fn rect(&self) -> Result<[f64; 4]> {
        let h = DEFAULT_WINDOW_HEIGHT;
        let w = self.window.unwrap_or([-3.0, 3.0, -0.5 * h, 0.5 * h]);
        if !(w[0] < w[1] && w[2] < w[3]) || w.iter().any(|v| !v.is_finite()) {
            return invalid(format!(
                "window needs re_min < re_max and im_min < im_max, got {w:?}"
            ));
        }
        Ok(w)
    }

    fn angles(&self) -> Result<Vec<f64>> {
        let psi = if self.psi.is_empty() {
            vec![0.0]
        } else {
            self.psi.clone()
        };
        if psi.iter().any(|p| !(0.0..2.0 * PI).contains(p)) {
            return invalid("window angles must lie in [0, 2 pi)");
        }
        Ok(psi)
    }

    fn sweep(&self, default: &[f64]) -> Result<Vec<CoefficientProfile>> {
        let alphas = if self.alphas.is_empty() {
            default.to_vec()
        } else {
            self.alphas.clone()
        };
        alphas
            .iter()
            .map(|&a| CoefficientProfile::new(a, self.profile.slow, self.profile.sigma))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return invalid("trials must be >= 1");
        }
        match self.kind {
            ExperimentKind::AnnulusCount => {
                self.need_n()?;
                self.annulus()?;
            }
            ExperimentKind::WindowProcess => {
                self.need_n()?;
                self.rect()?;
                self.angles()?;
                if self.bins == Some(0) {
                    return invalid("bins must be >= 1");
                }
            }
            ExperimentKind::SpacingStats => {
                self.need_n()?;
                if self.band.is_some_and(|b| !(b > 0.0)) {
                    return invalid("band must be positive");
                }
            }
            ExperimentKind::SelfInversiveFraction => {
                self.need_m()?;
            }
            ExperimentKind::CircleCountingMeasure => {
                self.need_m()?;
                if self.bins == Some(0) {
                    return invalid("bins must be >= 1");
                }
            }
            ExperimentKind::HaarTraceMoments => {
                let n = self.need_n()?;
                let k = self.k_max.unwrap_or(8);
                if k < 1 || k > n {
                    return invalid(format!("k_max must lie in 1..=n, got {k}"));
                }
            }
            ExperimentKind::OutsideDiskUniversality => {
                self.need_n()?;
                self.sweep(&[-2.0, 0.0, 1.0])?;
                let [a, b] = self.radii.unwrap_or([1.05, 1.5]);
                if !(a > 0.0 && a <= b) {
                    return invalid(format!("radii need 0 < r1 <= r2, got [{a}, {b}]"));
                }
            }
            ExperimentKind::StrongWeakCrossoverCLT => {
                for p in self.sweep(&[self.profile.alpha])? {
                    if p.phase() != PhaseClass::StrongCrystalline {
                        return Err(Error::Domain(format!(
                            "crossover CLT needs strong crystalline profiles, got {p}"
                        )));
                    }
                }
                if self.truncation == Some(0) {
                    return invalid("truncation must be >= 1");
                }
                self.angles()?;
            }
            ExperimentKind::SelfInversiveRealZeros => {
                self.need_m()?;
                if self.t_max.is_some_and(|t| !(t > 0.0)) {
                    return invalid("t_max must be positive");
                }
            }
        }
        Ok(())
    }
}

/// Moments for the exact circle fraction under `law`, or `None` for laws it does not cover.
///
/// The closed form holds when real and imaginary parts each have variance
/// `sigma^2`, so the moments use the law's component sigma, not the profile's.
pub fn si_moments_for_law(
    profile: &CoefficientProfile,
    law: &CoefficientLaw,
    m: usize,
) -> Result<Option<theory::SelfInversiveMoments>> {
    if !(law.is_gaussian() && law.is_isotropic()) {
        return Ok(None);
    }
    let sc = law.component_sigmas().0;
    let p = CoefficientProfile::new(profile.alpha, profile.slow, sc)?;
    Ok(Some(theory::SelfInversiveMoments::new(&p, m)?))
}

/// One trial's statistics; `values` is empty for a failed trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub failed: bool,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub mean: f64,
    pub se: f64,
    pub count: usize,
    pub theory: Option<f64>,
    /// `(mean - theory) / se`; absent without a theory value or when `se = 0` and they differ.
    pub z: Option<f64>,
}

impl Statistic {
    /// Mean and standard error `sd / sqrt(count)` of a sample, in the given order.
    pub fn from_sample(name: &str, xs: &[f64], theory: Option<f64>) -> Self {
        let (mean, se) = mean_se(xs);
        Self {
            name: name.to_string(),
            mean,
            se,
            count: xs.len(),
            theory,
            z: z_score(mean, se, theory),
        }
    }

    pub fn passes(&self) -> bool {
        self.z.is_some_and(|z| z.abs() < Z_THRESHOLD)
    }
}

fn z_score(mean: f64, se: f64, theory: Option<f64>) -> Option<f64> {
    let t = theory.filter(|t| t.is_finite())?;
    if se > 0.0 {
        Some((mean - t) / se)
    } else if (mean - t).abs() <= 1e-12 * t.abs() {
        Some(0.0)
    } else {
        None
    }
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub empirical: f64,
    pub se: f64,
    pub theory: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub master_seed: u64,
    pub trials: usize,
    pub included: usize,
    pub failures: usize,
    pub statistics: Vec<Statistic>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Summary {
    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub records: Vec<ExperimentRecord>,
    pub summary: Summary,
    pub histogram: Vec<HistogramBin>,
}

impl ExperimentOutput {
    /// `trial_id,failed,<columns...>`.
    pub fn write_records<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "trial_id,failed")?;
        for c in &self.columns {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for r in &self.records {
            write!(w, "{},{}", r.trial, r.failed)?;
            if r.failed {
                for _ in &self.columns {
                    write!(w, ",")?;
                }
            } else {
                for v in &r.values {
                    write!(w, ",{v}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// `bin_lo,bin_hi,empirical,theory,z` (empty cells where undefined).
    pub fn write_histogram<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_lo,bin_hi,empirical,theory,z")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.histogram {
            writeln!(
                w,
                "{},{},{},{},{}",
                b.bin_lo,
                b.bin_hi,
                b.empirical,
                opt(b.theory),
                opt(b.z)
            )?;
        }
        Ok(())
    }

    /// Writes `records.csv`, `summary.json` and, when present, `histogram.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut rec = Vec::new();
        self.write_records(&mut rec)?;
        fs::write(dir.join("records.csv"), rec)?;
        fs::write(dir.join("summary.json"), self.summary.to_json()? + "\n")?;
        if !self.histogram.is_empty() {
            let mut h = Vec::new();
            self.write_histogram(&mut h)?;
            fs::write(dir.join("histogram.csv"), h)?;
        }
        Ok(())
    }
}

/// What one trial hands back: recorded values plus unrecorded per-bin data.
#[derive(Clone, Debug, Default)]
struct TrialData {
    values: Vec<f64>,
    extra: Vec<f64>,
}

fn is_trial_failure(e: &Error) -> bool {
    matches!(e, Error::Numerical(_) | Error::MagnitudeOutOfRange(_))
}

/// Runs `f` on every trial index in parallel; numerical failures become `None`.
fn run_trials<F>(trials: usize, f: F) -> Result<Vec<Option<TrialData>>>
where
    F: Fn(usize) -> Result<TrialData> + Sync,
{
    let out: Vec<Result<TrialData>> = (0..trials).into_par_iter().map(&f).collect();
    let mut res = Vec::with_capacity(trials);
    for r in out {
        match r {
            Ok(d) => res.push(Some(d)),
            Err(e) if is_trial_failure(&e) => res.push(None),
            Err(e) => return Err(e),
        }
    }
    let failures = res.iter().filter(|r| r.is_none()).count();
    if failures as f64 > MAX_FAILURE_FRACTION * trials as f64 {
        return Err(Error::Numerical(format!(
            "{failures} of {trials} trials failed; experiment aborted"
        )));
    }
    Ok(res)
}

fn solve(p: &ComplexPolynomial) -> Result<ZeroSet> {
    let zs = polynomial_zeros(p, &RootConfig::default())?;
    if !zs.all_converged() {
        return Err(Error::Numerical(
            zs.diagnostic
                .clone()
                .unwrap_or_else(|| "root finding failed".into()),
        ));
    }
    Ok(zs)
}

fn seed(cfg: &ExperimentConfig, trial: usize) -> SeedSpec {
    SeedSpec::new(cfg.master_seed, trial as u64)
}

/// Column `j` of the included trials, in trial order.
fn column(data: &[Option<TrialData>], j: usize) -> Vec<f64> {
    data.iter().flatten().map(|d| d.values[j]).collect()
}

struct Assembled {
    columns: Vec<String>,
    data: Vec<Option<TrialData>>,
    statistics: Vec<Statistic>,
    diagnostics: BTreeMap<String, f64>,
    histogram: Vec<HistogramBin>,
}

fn finish(cfg: &ExperimentConfig, a: Assembled) -> ExperimentOutput {
    let failures = a.data.iter().filter(|d| d.is_none()).count();
    let records = a
        .data
        .iter()
        .enumerate()
        .map(|(i, d)| match d {
            Some(d) => ExperimentRecord {
                trial: i,
                failed: false,
                values: d.values.clone(),
            },
            None => ExperimentRecord {
                trial: i,
                failed: true,
                values: Vec::new(),
            },
        })
        .collect();
    let summary = Summary {
        kind: cfg.kind,
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        included: cfg.trials - failures,
        failures,
        statistics: a.statistics,
        diagnostics: a.diagnostics,
    };
    ExperimentOutput {
        config: cfg.clone(),
        columns: a.columns,
        records,
        summary,
        histogram: a.histogram,
    }
}

/// Runs an experiment on the current rayon pool.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let a = match cfg.kind {
        ExperimentKind::AnnulusCount => annulus_count(cfg)?,
        ExperimentKind::WindowProcess => window_process(cfg)?,
        ExperimentKind::SpacingStats => spacing_experiment(cfg)?,
        ExperimentKind::SelfInversiveFraction => si_fraction(cfg)?,
        ExperimentKind::CircleCountingMeasure => circle_counting(cfg)?,
        ExperimentKind::HaarTraceMoments => haar_traces(cfg)?,
        ExperimentKind::OutsideDiskUniversality => outside_disk(cfg)?,
        ExperimentKind::StrongWeakCrossoverCLT => crossover_clt(cfg)?,
        ExperimentKind::SelfInversiveRealZeros => si_real_zeros(cfg)?,
    };
    Ok(finish(cfg, a))
}

/// Runs an experiment on a dedicated pool of `threads` workers (all cores when `None`).
pub fn run_with_threads(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentOutput> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return invalid("threads must be >= 1");
        }
        b = b.num_threads(t);
    }
    let pool = b
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

/// Mean gap and coefficient of variation of sorted angular gaps, wrap-around included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacingStats {
    pub count: usize,
    pub mean_gap: f64,
    pub cv: f64,
}

/// Needs at least 10 angles; `None` otherwise.
pub fn spacing_stats(angles: &[f64]) -> Option<SpacingStats> {
    if angles.len() < 10 {
        return None;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    a.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(2.0 * PI + a[0] - a[a.len() - 1]);
    let (mean, sd) = gap_moments(&gaps);
    Some(SpacingStats {
        count: angles.len(),
        mean_gap: mean,
        cv: sd / mean,
    })
}

/// Mean and population standard deviation.
fn gap_moments(gaps: &[f64]) -> (f64, f64) {
    let mean = pairwise_sum(gaps) / gaps.len() as f64;
    let dev: Vec<f64> = gaps.iter().map(|g| (g - mean) * (g - mean)).collect();
    (mean, (pairwise_sum(&dev) / gaps.len() as f64).sqrt())
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// Bins over `Re u` for window point clouds.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowHistogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    /// Im-u extent of the window.
    pub height: f64,
}

impl WindowHistogram {
    pub fn new(lo: f64, hi: f64, bins: usize, height: f64) -> Result<Self> {
        if !(lo < hi) || bins == 0 || !(height > 0.0) {
            return invalid("histogram needs lo < hi, bins >= 1 and a positive height");
        }
        Ok(Self {
            lo,
            hi,
            bins,
            height,
        })
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    /// Per-bin counts of one trial's window points; points outside `[lo, hi)` are dropped.
    pub fn counts(&self, us: &[Complex64]) -> Vec<f64> {
        let mut c = vec![0.0; self.bins];
        for u in us {
            if u.re >= self.lo && u.re < self.hi {
                let b = (((u.re - self.lo) / self.width()) as usize).min(self.bins - 1);
                c[b] += 1.0;
            }
        }
        c
    }

    /// Densities `counts / (trials * height * width)` with per-bin standard
    /// errors, compared with the bin average of `theory` (per unit area).
    pub fn finish(
        &self,
        per_trial: &[Vec<f64>],
        theory: Option<&dyn Fn(f64) -> Result<f64>>,
    ) -> Result<Vec<HistogramBin>> {
        let area = self.height * self.width();
        let mut out = Vec::with_capacity(self.bins);
        for b in 0..self.bins {
            let lo = self.lo + b as f64 * self.width();
            let hi = if b + 1 == self.bins {
                self.hi
            } else {
                lo + self.width()
            };
            let xs: Vec<f64> = per_trial.iter().map(|c| c[b] / area).collect();
            let (mean, se) = if xs.is_empty() {
                (0.0, 0.0)
            } else {
                mean_se(&xs)
            };
            let th = match theory {
                Some(f) => Some(bin_average(f, lo, hi)?),
                None => None,
            };
            out.push(HistogramBin {
                bin_lo: lo,
                bin_hi: hi,
                empirical: mean,
                se,
                theory: th,
                z: z_score(mean, se, th),
            });
        }
        Ok(out)
    }
}

/// Average of `f` over `[a, b]` by 8-point Gauss-Legendre.
fn bin_average(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for i in 0..4 {
        acc += W[i] * (f(c - h * X[i])? + f(c + h * X[i])?);
    }
    Ok(0.5 * acc)
}

/// Limit intensity per unit area in window coordinates for the profile's phase.
fn limit_spec(profile: &CoefficientProfile) -> Result<theory::LimitSpec> {
    Ok(match profile.phase() {
        PhaseClass::Liquid => theory::LimitSpec::Liquid {
            alpha: profile.alpha,
        },
        PhaseClass::WeakCrystalline => theory::LimitSpec::Weak,
        PhaseClass::StrongCrystalline => theory::LimitSpec::Strong {
            m_alpha: theory::strong_shift(profile)?.0,
        },
    })
}

/// Expected fraction of zeros with `s1 < Re u < s2`, from the mean limit intensity.
fn annulus_theory(profile: &CoefficientProfile, s1: f64, s2: f64) -> Result<f64> {
    match limit_spec(profile)? {
        theory::LimitSpec::Liquid { alpha } => theory::annulus_liquid(alpha, s1, s2),
        theory::LimitSpec::Strong { m_alpha } => theory::annulus_weak(s1 - m_alpha, s2 - m_alpha),
        _ => theory::annulus_weak(s1, s2),
    }
}

fn annulus_count(cfg: &ExperimentConfig) -> Result<Assembled> {
    let n = cfg.need_n()?;
    let (s1, s2) = cfg.annulus()?;
    let prof = cfg.profile;
    let win = make_window(&prof, n, 0.0)?;
    let strong = prof.phase() == PhaseClass::StrongCrystalline;
    let (trunc, grid) = if strong {
        let t = cfg
            .truncation
            .map(Ok)
            .unwrap_or_else(|| p_infty_truncation(&prof).map(|x| x.0))?;
        let g: Vec<f64> = (0..4096).map(|j| 2.0 * PI * j as f64 / 4096.0).collect();
        (t, g)
    } else {
        (0, Vec::new())
    };
    let sigma2 = cfg.law.variance();
    let data = run_trials(cfg.trials, |i| {
        let xi = draw_xi(&cfg.law, (n + 1).max(trunc + 1), seed(cfg, i));
        let p = sample_polynomial_from_xi(&prof, &xi[..=n])?;
        let zs = solve(&p)?;
        let inside = zs.zeros.iter().filter(|z| {
            let s = win.radial_coordinate(**z);
            s > s1 && s < s2
        });
        let count = inside.count();
        let mut values = vec![count as f64 / n as f64, (zs.len() - count) as f64];
        if zs.len() != n {
            return Err(Error::Numerical(format!(
                "found {} zeros for degree {n}",
                zs.len()
            )));
        }
        if strong {
            let pv = sample_p_infty_from_xi(&prof, &xi[..=trunc], &grid);
            let abs2: Vec<f64> = pv.iter().map(|v| v.norm_sqr()).collect();
            values.push(theory::annulus_strong_functional(&abs2, sigma2, s1, s2)?);
        }
        Ok(TrialData {
            values,
            extra: Vec::new(),
        })
    })?;
    let frac = column(&data, 0);
    let mut diagnostics = BTreeMap::new();
    let mut columns = vec!["fraction".to_string(), "outside".to_string()];
    let mut statistics = Vec::new();
    if strong {
        columns.push("functional".into());
        let f = column(&data, 2);
        let th = pairwise_sum(&f) / f.len() as f64;
        statistics.push(Statistic::from_sample("fraction", &frac, Some(th)));
        statistics.push(Statistic::from_sample("functional", &f, None));
        diagnostics.insert("ks_distance".into(), ks_distance(&frac, &f));
        diagnostics.insert("truncation".into(), trunc as f64);
    } else {
        statistics.push(Statistic::from_sample(
            "fraction",
            &frac,
            Some(annulus_theory(&prof, s1, s2)?),
        ));
    }
    diagnostics.insert("radius".into(), win.radius);
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics,
        histogram: Vec::new(),
    })
}

/// The polynomial in window coordinates `u`, with `d/du`.
struct WindowFunction<'a> {
    p: &'a ComplexPolynomial,
    win: &'a ScalingWindow,
}

impl crate::roots::AnalyticFunction for WindowFunction<'_> {
    fn eval(&self, u: Complex64) -> (Complex64, Complex64) {
        let z = self.win.to_window(u);
        let (f, d) = self.p.eval_with_derivative(z);
        (f, d * z / self.win.n as f64)
    }
}

fn window_process(cfg: &ExperimentConfig) -> Result<Assembled> {
    let n = cfg.need_n()?;
    let rect = cfg.rect()?;
    let angles = cfg.angles()?;
    let prof = cfg.profile;
    let height = rect[3] - rect[2];
    let hist_on = cfg.histogram.unwrap_or(true);
    let hist = WindowHistogram::new(rect[0], rect[1], cfg.bins.unwrap_or(24), height)?;
    let windows: Vec<ScalingWindow> = angles
        .iter()
        .map(|&a| make_window(&prof, n, a))
        .collect::<Result<_>>()?;
    let r = Rect::new(rect[0], rect[1], rect[2], rect[3])?;
    let data = run_trials(cfg.trials, |i| {
        let p = crate::ensembles::sample_polynomial(&prof, &cfg.law, n, seed(cfg, i))?;
        let mut values = Vec::with_capacity(windows.len());
        let mut extra = Vec::new();
        if hist_on {
            let zs = solve(&p)?;
            for (j, w) in windows.iter().enumerate() {
                let us: Vec<Complex64> = zs.zeros.iter().map(|z| w.from_window(*z)).collect();
                let inside = us.iter().filter(|u| {
                    u.re > rect[0] && u.re < rect[1] && u.im > rect[2] && u.im < rect[3]
                });
                let inside: Vec<Complex64> = inside.cloned().collect();
                values.push(inside.len() as f64);
                if j == 0 {
                    extra = hist.counts(&inside);
                }
            }
        } else {
            for w in &windows {
                let f = WindowFunction { p: &p, win: w };
                values.push(winding_number(&f, &r).map_err(|e| match e {
                    Error::Domain(m) | Error::InvalidInput(m) => Error::Numerical(m),
                    e => e,
                })? as f64);
            }
        }
        Ok(TrialData { values, extra })
    })?;
    let columns: Vec<String> = (0..angles.len()).map(|j| format!("count_{j}")).collect();
    let law_ok = cfg.law.is_isotropic() || angles.iter().all(|a| !on_real_axis(*a));
    let mean_count = if law_ok {
        Some(annulus_theory(&prof, rect[0], rect[1])? * height / (2.0 * PI))
    } else {
        None
    };
    let mut statistics: Vec<Statistic> = (0..angles.len())
        .map(|j| Statistic::from_sample(&columns[j], &column(&data, j), mean_count))
        .collect();
    let mut diagnostics = BTreeMap::new();
    for i in 0..angles.len() {
        for j in i + 1..angles.len() {
            let (r, se) = correlation(&column(&data, i), &column(&data, j));
            let sum = (angles[i] + angles[j]).rem_euclid(2.0 * PI);
            let conj = sum < 1e-12 || 2.0 * PI - sum < 1e-12;
            let th = if conj { None } else { Some(0.0) };
            statistics.push(Statistic {
                name: format!("corr_{i}_{j}"),
                mean: r,
                se,
                count: data.len(),
                theory: th,
                z: z_score(r, se, th),
            });
            diagnostics.insert(
                format!("corr_{i}_{j}_over_se"),
                if se > 0.0 { r / se } else { 0.0 },
            );
        }
    }
    let histogram = if hist_on {
        let per: Vec<Vec<f64>> = data.iter().flatten().map(|d| d.extra.clone()).collect();
        if law_ok {
            let spec = limit_spec(&prof)?;
            let f = move |s: f64| theory::limit_intensity(spec, s);
            hist.finish(&per, Some(&f))?
        } else {
            hist.finish(&per, None)?
        }
    } else {
        Vec::new()
    };
    diagnostics.insert("window_height".into(), height);
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics,
        histogram,
    })
}

fn on_real_axis(psi: f64) -> bool {
    let r = psi.rem_euclid(PI);
    r < 1e-12 || PI - r < 1e-12
}

/// Pearson correlation with standard error `(1 - r^2) / sqrt(N - 1)`.
pub fn correlation(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len().min(y.len());
    if n < 3 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pairwise_sum(&x[..n]) / n as f64;
    let my = pairwise_sum(&y[..n]) / n as f64;
    let sxy: Vec<f64> = (0..n).map(|i| (x[i] - mx) * (y[i] - my)).collect();
    let sxx: Vec<f64> = (0..n).map(|i| (x[i] - mx).powi(2)).collect();
    let syy: Vec<f64> = (0..n).map(|i| (y[i] - my).powi(2)).collect();
    let den = (pairwise_sum(&sxx) * pairwise_sum(&syy)).sqrt();
    let r = if den > 0.0 {
        pairwise_sum(&sxy) / den
    } else {
        0.0
    };
    (r, (1.0 - r * r) / ((n - 1) as f64).sqrt())
}

fn spacing_experiment(cfg: &ExperimentConfig) -> Result<Assembled> {
    let n = cfg.need_n()?;
    let band = cfg.band.unwrap_or(8.0);
    let prof = cfg.profile;
    let win = make_window(&prof, n, 0.0)?;
    let data = run_trials(cfg.trials, |i| {
        let p = crate::ensembles::sample_polynomial(&prof, &cfg.law, n, seed(cfg, i))?;
        let zs = solve(&p)?;
        let near: Vec<f64> = zs
            .zeros
            .iter()
            .filter(|z| win.radial_coordinate(**z).abs() < band)
            .map(|z| z.arg())
            .collect();
        let frac = near.len() as f64 / zs.len() as f64;
        let (gap, cv) = match spacing_stats(&near) {
            Some(s) => (s.mean_gap, s.cv),
            None => (f64::NAN, f64::NAN),
        };
        Ok(TrialData {
            values: vec![cv, gap, frac],
            extra: Vec::new(),
        })
    })?;
    let cvs: Vec<f64> = column(&data, 0)
        .into_iter()
        .filter(|c| c.is_finite())
        .collect();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("median_cv".into(), median(&cvs));
    diagnostics.insert(
        "skipped_trials".into(),
        (data.iter().flatten().count() - cvs.len()) as f64,
    );
    let fr = column(&data, 2);
    diagnostics.insert(
        "min_fraction_in_band".into(),
        fr.iter().cloned().fold(f64::INFINITY, f64::min),
    );
    let statistics = vec![
        Statistic::from_sample("cv", &cvs, None),
        Statistic::from_sample("fraction_in_band", &fr, None),
    ];
    Ok(Assembled {
        columns: vec!["cv".into(), "mean_gap".into(), "fraction_in_band".into()],
        data,
        statistics,
        diagnostics,
        histogram: Vec::new(),
    })
}

fn si_circle_zeros(
    prof: &CoefficientProfile,
    law: &CoefficientLaw,
    m: usize,
    s: SeedSpec,
) -> Result<(ZeroSet, f64, usize)> {
    let p = sample_self_inversive_from_xi(prof, &draw_xi(law, m, s))?;
    let zs = solve(&p)?;
    let tol = default_tol_circle(&p, &zs);
    let cc = count_on_unit_circle(&zs, tol);
    Ok((zs, tol, cc.nu))
}

fn si_fraction(cfg: &ExperimentConfig) -> Result<Assembled> {
    let m = cfg.need_m()?;
    let prof = cfg.profile;
    let data = run_trials(cfg.trials, |i| {
        let (_, _, nu) = si_circle_zeros(&prof, &cfg.law, m, seed(cfg, i))?;
        Ok(TrialData {
            values: vec![nu as f64 / (2 * m + 1) as f64],
            extra: Vec::new(),
        })
    })?;
    let th = match si_moments_for_law(&prof, &cfg.law, m)? {
        Some(mom) => Some(theory::si_fraction_from_moments(&mom)?),
        None => None,
    };
    let statistics = vec![Statistic::from_sample("fraction", &column(&data, 0), th)];
    Ok(Assembled {
        columns: vec!["fraction".into()],
        data,
        statistics,
        diagnostics: BTreeMap::new(),
        histogram: Vec::new(),
    })
}

fn circle_counting(cfg: &ExperimentConfig) -> Result<Assembled> {
    let m = cfg.need_m()?;
    let bins = cfg.bins.unwrap_or(16);
    let prof = cfg.profile;
    let width = 2.0 * PI / bins as f64;
    let data = run_trials(cfg.trials, |i| {
        let (zs, tol, nu) = si_circle_zeros(&prof, &cfg.law, m, seed(cfg, i))?;
        let mut counts = vec![0.0; bins];
        for z in &zs.zeros {
            if z.norm().ln().abs() <= tol {
                let a = z.arg().rem_euclid(2.0 * PI);
                counts[((a / width) as usize).min(bins - 1)] += 1.0;
            }
        }
        Ok(TrialData {
            values: vec![nu as f64],
            extra: counts,
        })
    })?;
    let mom = si_moments_for_law(&prof, &cfg.law, m)?;
    let mut histogram = Vec::with_capacity(bins);
    for b in 0..bins {
        let lo = b as f64 * width;
        let hi = if b + 1 == bins { 2.0 * PI } else { lo + width };
        let xs: Vec<f64> = data.iter().flatten().map(|d| d.extra[b]).collect();
        let (mean, se) = mean_se(&xs);
        let th = match &mom {
            Some(mom) => {
                Some(theory::si_circle_counting(mom, hi)? - theory::si_circle_counting(mom, lo)?)
            }
            None => None,
        };
        histogram.push(HistogramBin {
            bin_lo: lo,
            bin_hi: hi,
            empirical: mean,
            se,
            theory: th,
            z: z_score(mean, se, th),
        });
    }
    let th = match &mom {
        Some(mom) => Some(theory::si_circle_counting(mom, 2.0 * PI)?),
        None => None,
    };
    let statistics = vec![Statistic::from_sample(
        "circle_zeros",
        &column(&data, 0),
        th,
    )];
    Ok(Assembled {
        columns: vec!["circle_zeros".into()],
        data,
        statistics,
        diagnostics: BTreeMap::new(),
        histogram,
    })
}

fn haar_traces(cfg: &ExperimentConfig) -> Result<Assembled> {
    let n = cfg.need_n()?;
    let k_max = cfg.k_max.unwrap_or(8);
    let data = run_trials(cfg.trials, |i| {
        let tr = haar_log_charpoly(n, k_max, seed(cfg, i))?;
        Ok(TrialData {
            values: tr.iter().map(|t| t.norm_sqr()).collect(),
            extra: Vec::new(),
        })
    })?;
    let columns: Vec<String> = (1..=k_max).map(|k| format!("abs2_tr_{k}")).collect();
    let statistics = (0..k_max)
        .map(|j| {
            Statistic::from_sample(&columns[j], &column(&data, j), Some((j + 1).min(n) as f64))
        })
        .collect();
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics: BTreeMap::new(),
        histogram: Vec::new(),
    })
}

fn outside_disk(cfg: &ExperimentConfig) -> Result<Assembled> {
    let n = cfg.need_n()?;
    let profiles = cfg.sweep(&[-2.0, 0.0, 1.0])?;
    let [r1, r2] = cfg.radii.unwrap_or([1.05, 1.5]);
    let data = run_trials(cfg.trials, |i| {
        let mut values = Vec::with_capacity(profiles.len());
        for (j, prof) in profiles.iter().enumerate() {
            let p = crate::ensembles::sample_polynomial(
                prof,
                &cfg.law,
                n,
                seed(cfg, i).child(j as u64),
            )?;
            let zs = solve(&p)?;
            values.push(
                zs.zeros
                    .iter()
                    .filter(|z| (r1..=r2).contains(&z.norm()) && r1 < r2)
                    .count() as f64,
            );
        }
        Ok(TrialData {
            values,
            extra: Vec::new(),
        })
    })?;
    let columns: Vec<String> = profiles
        .iter()
        .map(|p| format!("count_alpha_{}", p.alpha))
        .collect();
    let statistics: Vec<Statistic> = (0..profiles.len())
        .map(|j| Statistic::from_sample(&columns[j], &column(&data, j), None))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..statistics.len() {
        for j in i + 1..statistics.len() {
            let (a, b) = (&statistics[i], &statistics[j]);
            let se = (a.se * a.se + b.se * b.se).sqrt();
            if se > 0.0 {
                worst = worst.max((a.mean - b.mean).abs() / se);
            } else if a.mean != b.mean {
                worst = f64::INFINITY;
            }
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("max_pairwise_z".into(), worst);
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics,
        histogram: Vec::new(),
    })
}

/// Sample excess-free kurtosis `m4 / m2^2`.
fn kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let m2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let m4: Vec<f64> = xs.iter().map(|x| (x - mean).powi(4)).collect();
    let v = pairwise_sum(&m2) / n;
    pairwise_sum(&m4) / n / (v * v)
}

fn crossover_clt(cfg: &ExperimentConfig) -> Result<Assembled> {
    let profiles = cfg.sweep(&[cfg.profile.alpha])?;
    let psi = cfg.angles()?[0];
    let mut setups = Vec::with_capacity(profiles.len());
    for prof in &profiles {
        let t = match cfg.truncation {
            Some(t) => t,
            None => p_infty_truncation(prof)?.0,
        };
        let b2: Vec<f64> = (0..=t).map(|k| prof.b(k).powi(2)).collect();
        let s = pairwise_sum(&b2);
        let sup = b2.iter().cloned().fold(0.0, f64::max) / s;
        setups.push((t, s, sup));
    }
    let data = run_trials(cfg.trials, |i| {
        let mut values = Vec::with_capacity(4 * profiles.len());
        for (j, prof) in profiles.iter().enumerate() {
            let (t, s, _) = setups[j];
            let xi = draw_xi(&cfg.law, t + 1, seed(cfg, i).child(j as u64));
            let x = sample_p_infty_from_xi(prof, &xi, &[psi])[0] / s.sqrt();
            let sq = x * x;
            values.extend_from_slice(&[x.re, x.im, x.norm_sqr(), sq.re]);
        }
        Ok(TrialData {
            values,
            extra: Vec::new(),
        })
    })?;
    let (s1, s2) = cfg.law.component_sigmas();
    let pseudo = if on_real_axis(psi) {
        s1 * s1 - s2 * s2
    } else {
        0.0
    };
    let mut columns = Vec::new();
    let mut statistics = Vec::new();
    let mut diagnostics = BTreeMap::new();
    for (j, prof) in profiles.iter().enumerate() {
        let a = prof.alpha;
        for c in ["re", "im", "abs2", "re_square"] {
            columns.push(format!("{c}_alpha_{a}"));
        }
        statistics.push(Statistic::from_sample(
            &format!("variance_alpha_{a}"),
            &column(&data, 4 * j + 2),
            Some(cfg.law.variance()),
        ));
        statistics.push(Statistic::from_sample(
            &format!("pseudo_variance_alpha_{a}"),
            &column(&data, 4 * j + 3),
            Some(pseudo),
        ));
        diagnostics.insert(
            format!("kurtosis_re_alpha_{a}"),
            kurtosis(&column(&data, 4 * j)),
        );
        diagnostics.insert(format!("sup_ratio_alpha_{a}"), setups[j].2);
        diagnostics.insert(format!("truncation_alpha_{a}"), setups[j].0 as f64);
    }
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics,
        histogram: Vec::new(),
    })
}

/// Real zeros `t` in `[0, t_max]` of `e^{-i t (m + 1/2)/m} K_m(e^{i t/m})` for `K_m`
/// built from `xi_1..xi_m`, located by sign changes on `grid` cells and bisection.
pub fn si_real_zeros_from_xi(
    profile: &CoefficientProfile,
    xi: &[Complex64],
    t_max: f64,
    grid: usize,
) -> Result<Vec<f64>> {
    let m = xi.len();
    if m < 1 || grid < 2 || !(t_max > 0.0) {
        return invalid("real zeros need m >= 1, grid >= 2 and t_max > 0");
    }
    let c: Vec<Complex64> = xi
        .iter()
        .enumerate()
        .map(|(k, x)| x * profile.b(k + 1))
        .collect();
    let mf = m as f64;
    let f = |t: f64| {
        let th = t / mf;
        let step = Complex64::from_polar(1.0, th);
        let mut z = step;
        let mut acc = Complex64::new(1.0, 0.0);
        for ck in &c {
            acc += ck * z;
            z *= step;
        }
        2.0 * (Complex64::from_polar(1.0, -th * (mf + 0.5)) * acc).re
    };
    Ok(sign_change_roots(f, t_max, grid))
}

fn sign_change_roots(f: impl Fn(f64) -> f64, t_max: f64, grid: usize) -> Vec<f64> {
    let h = t_max / grid as f64;
    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a);
    if fa == 0.0 {
        roots.push(0.0);
    }
    for j in 1..=grid {
        let b = if j == grid { t_max } else { j as f64 * h };
        let fb = f(b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa != 0.0 && (fa < 0.0) != (fb < 0.0) {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Sign changes of `2 Re(e^{-it} G_0(it))` on a grid, from one GAF sample.
fn gaf_real_zero_count(
    alpha: f64,
    law: &CoefficientLaw,
    t_max: f64,
    grid: usize,
    n_disc: usize,
    s: SeedSpec,
) -> Result<usize> {
    let ts: Vec<f64> = (0..=grid).map(|j| t_max * j as f64 / grid as f64).collect();
    let us: Vec<Complex64> = ts.iter().map(|t| Complex64::new(0.0, *t)).collect();
    let g = sample_gaf(alpha, law, 0.0, &us, n_disc, s)?;
    let v: Vec<f64> = ts
        .iter()
        .zip(&g)
        .map(|(t, g)| 2.0 * (Complex64::from_polar(1.0, -t) * g).re)
        .collect();
    Ok(v.windows(2)
        .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
        .count())
}

const REAL_ZERO_GRID: usize = 2048;

fn si_real_zeros(cfg: &ExperimentConfig) -> Result<Assembled> {
    let m = cfg.need_m()?;
    let t_max = cfg.t_max.unwrap_or(2.0 * PI);
    let prof = cfg.profile;
    let liquid = prof.phase() == PhaseClass::Liquid;
    let n_disc = cfg.n_disc.unwrap_or(2000);
    let data = run_trials(cfg.trials, |i| {
        let xi = draw_xi(&cfg.law, m, seed(cfg, i));
        let ts = si_real_zeros_from_xi(&prof, &xi, t_max, REAL_ZERO_GRID)?;
        let mut values = vec![ts.len() as f64];
        if liquid {
            let c = gaf_real_zero_count(
                prof.alpha,
                &cfg.law,
                t_max,
                REAL_ZERO_GRID,
                n_disc,
                seed(cfg, i).child(1),
            )?;
            values.push(c as f64);
        }
        let gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(TrialData {
            values,
            extra: gaps,
        })
    })?;
    let counts = column(&data, 0);
    let mut columns = vec!["real_zeros".to_string()];
    let mut diagnostics = BTreeMap::new();
    let gaps: Vec<f64> = data
        .iter()
        .flatten()
        .flat_map(|d| d.extra.iter().cloned())
        .collect();
    if gaps.len() >= 2 {
        let (mean, sd) = gap_moments(&gaps);
        diagnostics.insert("pooled_gap_mean".into(), mean);
        diagnostics.insert("pooled_gap_cv".into(), sd / mean);
    }
    let statistics = if liquid {
        columns.push("gaf_real_zeros".into());
        let g = column(&data, 1);
        let a = Statistic::from_sample("real_zeros", &counts, None);
        let b = Statistic::from_sample("gaf_real_zeros", &g, None);
        let se = (a.se * a.se + b.se * b.se).sqrt();
        diagnostics.insert(
            "z_vs_gaf".into(),
            if se > 0.0 {
                (a.mean - b.mean) / se
            } else {
                0.0
            },
        );
        vec![a, b]
    } else {
        vec![Statistic::from_sample("real_zeros", &counts, None)]
    };
    Ok(Assembled {
        columns,
        data,
        statistics,
        diagnostics,
        histogram: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::SlowVariation;

    fn icn() -> CoefficientLaw {
        CoefficientLaw::isotropic(1.0).unwrap()
    }

    #[test]
    fn spacing_of_exact_lattice() {
        let a: Vec<f64> = (0..50).map(|k| 2.0 * PI * k as f64 / 50.0).collect();
        let s = spacing_stats(&a).unwrap();
        assert!(s.cv < 1e-12);
        assert!((s.mean_gap - 2.0 * PI / 50.0).abs() < 1e-14);
        assert!(spacing_stats(&a[..9]).is_none());
    }

    #[test]
    fn histogram_normalisation_on_synthetic_lattice() {
        let h = WindowHistogram::new(-3.0, 3.0, 12, 10.0 * PI).unwrap();
        let width = 0.5;
        let mut per = Vec::new();
        for t in 0..7 {
            // Five lattice points per window at each bin centre, shifted per trial.
            let mut us = Vec::new();
            for b in 0..12 {
                let s = -3.0 + (b as f64 + 0.5) * width;
                for k in 0..5 {
                    us.push(Complex64::new(
                        s,
                        -5.0 * PI + 2.0 * PI * k as f64 + 0.1 * t as f64,
                    ));
                }
            }
            per.push(h.counts(&us));
        }
        let konst = |_: f64| Ok(1.0 / (2.0 * PI * width));
        let bins = h.finish(&per, Some(&konst)).unwrap();
        for b in &bins {
            assert!((b.empirical - 1.0 / (2.0 * PI * width)).abs() < 1e-12);
            assert_eq!(b.z, Some(0.0));
        }
        let empty = h.finish(&[vec![0.0; 12]], None).unwrap();
        assert!(empty
            .iter()
            .all(|b| b.empirical == 0.0 && b.se == 0.0 && b.z.is_none()));
    }

    #[test]
    fn ks_and_correlation() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (r, se) = correlation(&x, &x);
        assert!((r - 1.0).abs() < 1e-12 && se.abs() < 1e-12);
    }

    #[test]
    fn real_zeros_hook() {
        let prof = CoefficientProfile::power(0.0);
        let t = si_real_zeros_from_xi(&prof, &[Complex64::new(0.0, 0.0)], 2.0 * PI - 1e-9, 2048)
            .unwrap();
        assert_eq!(t.len(), 3);
        for (a, b) in t.iter().zip([PI / 3.0, PI, 5.0 * PI / 3.0]) {
            assert!((a - b).abs() < 1e-12, "{t:?}");
        }
    }

    #[test]
    fn config_json_round_trip_and_validation() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::AnnulusCount,
            CoefficientProfile::power(-0.5),
            icn(),
            10,
            7,
        );
        c.n = Some(100);
        c.s1 = Some(-1.0);
        c.s2 = Some(1.0);
        let j = c.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&j).unwrap(), c);
        assert_eq!(c.hash().len(), 16);
        assert!(
            ExperimentConfig::from_json(&j.replace("\"trials\": 10", "\"trials\": 0")).is_err()
        );
        assert!(ExperimentConfig::from_json(&j.replace("\"n\"", "\"bogus\"")).is_err());
        c.kind = ExperimentKind::SelfInversiveFraction;
        assert!(c.validate().is_err());
        c.m = Some(5);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn small_runs_are_schedule_independent() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::AnnulusCount,
            CoefficientProfile::power(0.0),
            icn(),
            12,
            3,
        );
        c.n = Some(60);
        let a = run_with_threads(&c, Some(1)).unwrap();
        let b = run_with_threads(&c, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.summary.failures, 0);
        for r in &a.records {
            assert_eq!((r.values[0] * 60.0).round() + r.values[1], 60.0);
        }
        let dir = tempfile::tempdir().unwrap();
        a.write_dir(dir.path()).unwrap();
        let rec = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
        assert!(rec.starts_with("trial_id,failed,fraction,outside\n"));
        assert_eq!(rec.lines().count(), 13);
    }

    #[test]
    fn haar_small() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::HaarTraceMoments,
            CoefficientProfile::power(0.0),
            icn(),
            300,
            11,
        );
        c.n = Some(16);
        c.k_max = Some(4);
        let out = run(&c).unwrap();
        for s in &out.summary.statistics {
            assert!(s.passes(), "{s:?}");
        }
    }

    #[test]
    fn si_fraction_small_m() {
        let split = CoefficientLaw::split(1.0, 1.0).unwrap();
        let mut c = ExperimentConfig::new(
            ExperimentKind::SelfInversiveFraction,
            CoefficientProfile::power(0.0),
            split,
            4000,
            5,
        );
        c.m = Some(2);
        let out = run(&c).unwrap();
        let s = out.summary.statistic("fraction").unwrap();
        assert!((s.theory.unwrap() - 0.624_702_448_833_523_25).abs() < 1e-12);
        assert!(s.passes(), "{s:?}");
    }

    #[test]
    fn crossover_clt_pseudo_variance() {
        let prof = CoefficientProfile::new(-2.0, SlowVariation::Constant(1.0), 1.0).unwrap();
        let mut c = ExperimentConfig::new(
            ExperimentKind::StrongWeakCrossoverCLT,
            prof,
            CoefficientLaw::RealRademacher,
            2000,
            9,
        );
        c.alphas = vec![-2.0, -0.6];
        c.truncation = Some(4000);
        let out = run(&c).unwrap();
        for s in &out.summary.statistics {
            assert!(s.passes(), "{s:?}");
        }
        let d = &out.summary.diagnostics;
        assert!(
            (d["kurtosis_re_alpha_-2"] - 3.0).abs() > (d["kurtosis_re_alpha_-0.6"] - 3.0).abs()
        );
    }

    #[test]
    fn failed_validation_propagates() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::StrongWeakCrossoverCLT,
            CoefficientProfile::power(0.0),
            icn(),
            3,
            1,
        );
        c.truncation = Some(10);
        assert!(run(&c).unwrap_err().is_validation());
    }
}
