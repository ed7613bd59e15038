//! The `rpz` command line: Table-1 diagnostics, samples, zeros, theory
//! curves, figure data and experiment runs, all emitted as CSV/JSON.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::{
    draw_xi, polynomial_with_log_weights, sample_polynomial, sample_self_inversive, CoefficientLaw,
    ComplexPolynomial, SeedSpec,
};
use crate::mc::{self, ExperimentConfig, ExperimentKind};
use crate::profiles::{CoefficientProfile, PhaseClass};
use crate::roots::{polynomial_zeros, RootConfig};
use crate::scaling::make_window;
use crate::theory::{self, LimitSpec, SelfInversiveMoments};
use crate::{invalid, Complex64, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "rpz",
    version,
    about = "Zeros of random polynomials with regularly varying coefficients"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; falls back to RPZ_SEED, then 0.
    #[arg(long, global = true, env = "RPZ_SEED")]
    pub seed: Option<u64>,
    /// Output directory; outputs go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Phase, r_n, c_n and a_n for a profile and degree.
    Phase(PhaseArgs),
    /// Coefficients of one sampled polynomial.
    Sample(SampleArgs),
    /// Zeros of one sampled polynomial as `re,im,residual,converged`.
    Zeros(SampleArgs),
    /// Limit and finite-n intensity curves in window coordinates.
    Intensity(IntensityArgs),
    /// Exact, asymptotic and limiting circle fractions of self-inversive polynomials.
    SiFraction(SiFractionArgs),
    /// Shifted rho_1 curves for a list of alpha and the sech^2 target.
    Crossover(CrossoverArgs),
    /// Haar-unitary trace moments E|Tr U^k|^2.
    Haar(HaarArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Zeros of n = 100 polynomials with weights (k+1)^alpha.
    Fig1(Fig1Args),
    /// Zeros inside a window of n = 1000 polynomials with weights (k+1)^alpha.
    Fig2(Fig2Args),
    /// rho_1 curves for alpha = -0.1, -0.5+1e-4, -0.5+1e-9 and the limit.
    Fig3(Fig3Args),
    /// Re-run a manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum ExperimentCommand {
    /// Run the experiment in a JSON config; --seed and --trials override the file.
    Run(RunArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PhaseArgs {
    #[arg(long)]
    pub profile: CoefficientProfile,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub profile: CoefficientProfile,
    #[arg(long, default_value = "icn:1")]
    pub law: CoefficientLaw,
    /// Degree of P_n.
    #[arg(long, conflicts_with = "m")]
    pub n: Option<usize>,
    /// Half-degree of the self-inversive K_m instead.
    #[arg(long)]
    pub m: Option<usize>,
    /// Trial index, used as the stream id.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct IntensityArgs {
    #[arg(long)]
    pub profile: CoefficientProfile,
    /// Adds the exact finite-n column.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SiFractionArgs {
    #[arg(long)]
    pub profile: CoefficientProfile,
    /// Comma-separated half-degrees.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    pub m: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CrossoverArgs {
    /// Comma-separated alpha values; sums such as -0.5+1e-9 are allowed.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_sum)]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct HaarArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Fig1Args {
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-2,0"
    )]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Fig2Args {
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// `re_min,re_max,im_min,im_max` in the z-plane.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0.9,1.1,-0.2,0.2"
    )]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Fig3Args {
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Reproducibility record written next to every output set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub threads: Option<usize>,
    /// The fully resolved config of an experiment run.
    pub experiment: Option<ExperimentConfig>,
    /// SHA-256 of each output file.
    pub outputs: BTreeMap<String, String>,
}

/// Parses `a`, or sums such as `-0.5+1e-9`.
pub fn parse_sum(s: &str) -> std::result::Result<f64, String> {
    let b = s.trim().as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..b.len() {
        if (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E') {
            parts.push(&s.trim()[start..i]);
            start = i;
        }
    }
    parts.push(&s.trim()[start..]);
    let mut total = 0.0;
    for p in parts {
        total += p
            .parse::<f64>()
            .map_err(|_| format!("bad number '{p}' in '{s}'"))?;
    }
    Ok(total)
}

struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    experiment: Option<ExperimentConfig>,
}

impl Outputs {
    fn one(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            files: vec![(name.to_string(), bytes)],
            experiment: None,
        }
    }
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rpz: {e}");
            if e.is_validation() || matches!(e, Error::Io(_)) {
                1
            } else {
                2
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return invalid("--threads must be >= 1");
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    if let Command::Replay(r) = &cli.command {
        return pool.install(|| replay(&r.manifest, cli.out.as_deref()));
    }
    let outputs = pool.install(|| dispatch(&cli.command, seed))?;
    emit(cli, seed, outputs)
}

fn emit(cli: &Cli, seed: u64, outputs: Outputs) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            write_outputs(dir, &outputs)?;
            let manifest = Manifest {
                tool: "rpz".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: cli.command.clone(),
                seed,
                threads: cli.threads,
                experiment: outputs.experiment.clone(),
                outputs: outputs
                    .files
                    .iter()
                    .map(|(n, b)| (n.clone(), sha_hex(b)))
                    .collect(),
            };
            fs::write(
                dir.join("manifest.json"),
                serde_json::to_string_pretty(&manifest)? + "\n",
            )?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            // Experiments print only the summary; the rest needs --out.
            let shown: Vec<&(String, Vec<u8>)> = if outputs.experiment.is_some() {
                outputs
                    .files
                    .iter()
                    .filter(|(n, _)| n == "summary.json")
                    .collect()
            } else {
                outputs.files.iter().collect()
            };
            for (_, bytes) in shown {
                stdout.write_all(bytes)?;
            }
        }
    }
    Ok(())
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in &outputs.files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn replay(path: &Path, out: Option<&Path>) -> Result<()> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    let outputs = match &manifest.experiment {
        Some(cfg) => experiment_outputs(cfg)?,
        None => dispatch(&manifest.command, manifest.seed)?,
    };
    let mut mismatched = Vec::new();
    for (name, bytes) in &outputs.files {
        if manifest.outputs.get(name) != Some(&sha_hex(bytes)) {
            mismatched.push(name.clone());
        }
    }
    if let Some(dir) = out {
        write_outputs(dir, &outputs)?;
    }
    if mismatched.is_empty() && outputs.files.len() == manifest.outputs.len() {
        println!("replay: {} outputs byte-identical", outputs.files.len());
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "replay differs from manifest: {}",
            mismatched.join(", ")
        )))
    }
}

fn dispatch(cmd: &Command, seed: u64) -> Result<Outputs> {
    match cmd {
        Command::Phase(a) => phase(a),
        Command::Sample(a) => sample(a, seed),
        Command::Zeros(a) => zeros(a, seed),
        Command::Intensity(a) => intensity(a),
        Command::SiFraction(a) => si_fraction(a),
        Command::Crossover(a) => crossover(&a.alphas, a.points),
        Command::Haar(a) => haar(a, seed),
        Command::Experiment(ExperimentCommand::Run(a)) => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(&a.config)?)?;
            if let Some(t) = a.trials {
                cfg.trials = t;
            }
            if std::env::var_os("RPZ_SEED").is_some() || seed != 0 {
                cfg.master_seed = seed;
            }
            experiment_outputs(&cfg)
        }
        Command::Fig1(a) => fig1(a, seed),
        Command::Fig2(a) => fig2(a, seed),
        Command::Fig3(a) => crossover(&[-0.1, -0.5 + 1e-4, -0.5 + 1e-9], a.points),
        Command::Replay(_) => invalid("replay cannot be nested"),
    }
}

fn experiment_outputs(cfg: &ExperimentConfig) -> Result<Outputs> {
    let out = mc::run(cfg)?;
    eprintln!(
        "experiment {:?}: {} trials, {} failures, config {}",
        cfg.kind, cfg.trials, out.summary.failures, out.summary.config_hash
    );
    let mut files = Vec::new();
    let mut rec = Vec::new();
    out.write_records(&mut rec)?;
    files.push(("records.csv".to_string(), rec));
    files.push((
        "summary.json".to_string(),
        (out.summary.to_json()? + "\n").into_bytes(),
    ));
    if !out.histogram.is_empty() {
        let mut h = Vec::new();
        out.write_histogram(&mut h)?;
        files.push(("histogram.csv".to_string(), h));
    }
    files.push((
        "config.json".to_string(),
        (cfg.to_json()? + "\n").into_bytes(),
    ));
    Ok(Outputs {
        files,
        experiment: Some(cfg.clone()),
    })
}

fn phase(a: &PhaseArgs) -> Result<Outputs> {
    let w = make_window(&a.profile, a.n, a.psi)?;
    let mut buf = Vec::new();
    writeln!(buf, "profile,n,phase,r_n,two_n_log_r_n,c_n,a_n")?;
    writeln!(
        buf,
        "\"{}\",{},{},{},{},{},{}",
        a.profile, a.n, w.phase, w.radius, w.log_radius_times_2n, w.normalizer, w.a_value
    )?;
    Ok(Outputs::one("phase.csv", buf))
}

fn sampled(a: &SampleArgs, seed: u64) -> Result<ComplexPolynomial> {
    let s = SeedSpec::new(seed, a.trial);
    match (a.n, a.m) {
        (Some(n), None) => sample_polynomial(&a.profile, &a.law, n, s),
        (None, Some(m)) => sample_self_inversive(&a.profile, &a.law, m, s),
        _ => invalid("give exactly one of --n or --m"),
    }
}

fn sample(a: &SampleArgs, seed: u64) -> Result<Outputs> {
    let p = sampled(a, seed)?;
    let scale = p.log_scale.exp();
    let mut buf = Vec::new();
    writeln!(buf, "k,re,im")?;
    for (k, c) in p.coeffs.iter().enumerate() {
        writeln!(buf, "{k},{},{}", c.re * scale, c.im * scale)?;
    }
    Ok(Outputs::one("coefficients.csv", buf))
}

fn zeros(a: &SampleArgs, seed: u64) -> Result<Outputs> {
    let p = sampled(a, seed)?;
    let zs = polynomial_zeros(&p, &RootConfig::default())?;
    if let Some(d) = &zs.diagnostic {
        eprintln!("rpz: {d}");
    }
    let mut buf = Vec::new();
    zs.write_csv(&mut buf)?;
    Ok(Outputs::one("zeros.csv", buf))
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(lo < hi) {
        return invalid("curves need at least 2 points and s_min < s_max");
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

fn limit_for(profile: &CoefficientProfile) -> Result<LimitSpec> {
    Ok(match profile.phase() {
        PhaseClass::Liquid => LimitSpec::Liquid {
            alpha: profile.alpha,
        },
        PhaseClass::WeakCrystalline => LimitSpec::Weak,
        PhaseClass::StrongCrystalline => LimitSpec::Strong {
            m_alpha: theory::strong_shift(profile)?.0,
        },
    })
}

fn intensity(a: &IntensityArgs) -> Result<Outputs> {
    let spec = limit_for(&a.profile)?;
    let win = match a.n {
        Some(n) => Some(make_window(&a.profile, n, 0.0)?),
        None => None,
    };
    let mut buf = Vec::new();
    writeln!(buf, "s,limit,finite_n")?;
    for s in grid(a.s_min, a.s_max, a.points)? {
        let lim = theory::limit_intensity(spec, s)?;
        let fin = match &win {
            Some(w) => {
                let n = w.n as f64;
                let log_r = w.log_radius_times_2n / (2.0 * n) + s / n;
                let r = log_r.exp();
                (theory::radial_intensity_finite(&a.profile, w.n, r)? * r / (n * n)).to_string()
            }
            None => String::new(),
        };
        writeln!(buf, "{s},{lim},{fin}")?;
    }
    Ok(Outputs::one("intensity.csv", buf))
}

fn si_fraction(a: &SiFractionArgs) -> Result<Outputs> {
    let p = &a.profile;
    let crystalline = p.alpha <= -0.5;
    let limit = if crystalline {
        1.0
    } else {
        theory::g_ratio_limit(p.alpha)?
    };
    let mut buf = Vec::new();
    writeln!(buf, "m,g1,g2,u,v,exact,deficit,asymptotic,limit")?;
    for &m in &a.m {
        let mom = SelfInversiveMoments::new(p, m)?;
        let exact = theory::si_fraction_from_moments(&mom)?;
        let deficit = theory::si_deficit_from_moments(&mom)?;
        let asym = if crystalline {
            theory::si_fraction_asymptotic(p, m)?.to_string()
        } else {
            String::new()
        };
        writeln!(
            buf,
            "{m},{},{},{},{},{exact},{deficit},{asym},{limit}",
            mom.g1, mom.g2, mom.u, mom.v
        )?;
    }
    Ok(Outputs::one("si_fraction.csv", buf))
}

fn crossover(alphas: &[f64], points: usize) -> Result<Outputs> {
    if alphas.is_empty() {
        return invalid("--alphas needs at least one value");
    }
    let mut shifts = Vec::with_capacity(alphas.len());
    for &a in alphas {
        match theory::crossover_shift(a) {
            Ok(s) => shifts.push(Some(s)),
            Err(Error::Domain(msg)) if a > -0.5 => {
                eprintln!("rpz: alpha = {a}: {msg}; curve left unshifted");
                shifts.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let mut buf = Vec::new();
    write!(buf, "s")?;
    for a in alphas {
        write!(buf, ",rho1_alpha_{a}")?;
    }
    writeln!(buf, ",sech2_target")?;
    for s in grid(-3.0, 3.0, points)? {
        write!(buf, "{s}")?;
        for (a, sh) in alphas.iter().zip(&shifts) {
            let x = s + sh.unwrap_or(0.0);
            write!(buf, ",{}", theory::rho1(*a, Complex64::new(x, 0.0))?)?;
        }
        writeln!(buf, ",{}", theory::limit_intensity(LimitSpec::Weak, s)?)?;
    }
    let mut shift_csv = Vec::new();
    writeln!(shift_csv, "alpha,shift,sup_error")?;
    for (a, sh) in alphas.iter().zip(&shifts) {
        match sh {
            Some(s) => writeln!(shift_csv, "{a},{s},{}", theory::crossover_error(*a)?)?,
            None => writeln!(shift_csv, "{a},,")?,
        }
    }
    Ok(Outputs {
        files: vec![
            ("crossover.csv".into(), buf),
            ("crossover_shifts.csv".into(), shift_csv),
        ],
        experiment: None,
    })
}

fn haar(a: &HaarArgs, seed: u64) -> Result<Outputs> {
    let mut cfg = ExperimentConfig::new(
        ExperimentKind::HaarTraceMoments,
        CoefficientProfile::power(0.0),
        CoefficientLaw::isotropic(1.0)?,
        a.trials,
        seed,
    );
    cfg.n = Some(a.n);
    cfg.k_max = Some(a.k_max);
    let out = mc::run(&cfg)?;
    let mut buf = Vec::new();
    writeln!(buf, "k,mean,se,theory,z")?;
    for (k, s) in out.summary.statistics.iter().enumerate() {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            buf,
            "{},{},{},{},{}",
            k + 1,
            s.mean,
            s.se,
            opt(s.theory),
            opt(s.z)
        )?;
    }
    Ok(Outputs::one("haar.csv", buf))
}

/// `sum_k (k+1)^alpha xi_k z^k` with standard complex normal `xi`.
fn figure_polynomial(alpha: f64, n: usize, s: SeedSpec) -> Result<ComplexPolynomial> {
    let logs: Vec<f64> = (0..=n).map(|k| alpha * ((k + 1) as f64).ln()).collect();
    polynomial_with_log_weights(&logs, &draw_xi(&CoefficientLaw::isotropic(1.0)?, n + 1, s))
}

fn fig1(a: &Fig1Args, seed: u64) -> Result<Outputs> {
    let mut buf = Vec::new();
    writeln!(buf, "alpha,re,im")?;
    for (j, &alpha) in a.alphas.iter().enumerate() {
        let p = figure_polynomial(alpha, a.n, SeedSpec::new(seed, j as u64))?;
        for z in polynomial_zeros(&p, &RootConfig::default())?.zeros {
            writeln!(buf, "{alpha},{},{}", z.re, z.im)?;
        }
    }
    Ok(Outputs::one("fig1.csv", buf))
}

fn fig2(a: &Fig2Args, seed: u64) -> Result<Outputs> {
    let [x0, x1, y0, y1] = match a.window[..] {
        [x0, x1, y0, y1] if x0 < x1 && y0 < y1 => [x0, x1, y0, y1],
        _ => return invalid("--window needs re_min,re_max,im_min,im_max with min < max"),
    };
    let r_n = match make_window(&CoefficientProfile::power(a.alpha), a.n, 0.0) {
        Ok(w) if w.phase != PhaseClass::Liquid => w.radius.to_string(),
        _ => String::new(),
    };
    let mut buf = Vec::new();
    writeln!(buf, "realization,re,im,r_n")?;
    for j in 0..a.realizations {
        let p = figure_polynomial(a.alpha, a.n, SeedSpec::new(seed, j as u64))?;
        for z in polynomial_zeros(&p, &RootConfig::default())?.zeros {
            if (x0..=x1).contains(&z.re) && (y0..=y1).contains(&z.im) {
                writeln!(buf, "{j},{},{},{r_n}", z.re, z.im)?;
            }
        }
    }
    Ok(Outputs::one("fig2.csv", buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_parse() {
        assert_eq!(parse_sum("-0.5+1e-9").unwrap(), -0.5 + 1e-9);
        assert_eq!(parse_sum("-0.1").unwrap(), -0.1);
        assert_eq!(parse_sum("1e-4").unwrap(), 1e-4);
        assert_eq!(parse_sum("-0.5+1e-4").unwrap(), -0.5 + 1e-4);
        assert!(parse_sum("x").is_err());
    }

    #[test]
    fn help_lists_subcommands() {
        use clap::CommandFactory;
        let help = Cli::command().render_help().to_string();
        for s in [
            "phase",
            "sample",
            "zeros",
            "intensity",
            "si-fraction",
            "crossover",
            "haar",
            "experiment",
            "fig1",
            "fig2",
            "fig3",
            "replay",
        ] {
            assert!(help.contains(s), "{s}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_cli(["rpz", "--bogus"]), 1);
        assert_eq!(
            run_cli(["rpz", "phase", "--profile", "alpha=0", "--n", "0"]),
            1
        );
    }
}
