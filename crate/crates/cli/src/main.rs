//! `kcirc`: partitions, spectra and limit-law experiments for k-circulant
//! matrices.
//!
//! Exit codes: 0 pass, 1 statistical failure, 2 usage or hypothesis error,
//! 3 I/O error.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcirc_core::export::{svg_scatter, write_labelled_points_csv, write_radii_csv};
use kcirc_core::extremes::{kbar, kbar_asymptotic};
use kcirc_core::montecarlo::{
    figure_preset, oracle_sweep, run_experiment, scatter_points, ExperimentConfig, ExperimentKind,
    ExperimentReport, InputLaw, FIGURE_PRESETS,
};
use kcirc_core::numtheory::{decompose, eigen_partition, gcd, pow_mod, upsilon_of, Conjugacy};
use kcirc_core::spectral::{InputSequence, KCirculant};
use num_complex::Complex64;
use serde_json::json;

use crate::config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(kcirc_core::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                kcirc_core::Error::Quadrature { .. } | kcirc_core::Error::NoConvergence { .. } => 1,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<kcirc_core::Error> for CliError {
    fn from(e: kcirc_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "kcirc", version, about = "Spectra of random k-circulant matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalue partition of Z_n' under multiplication by k.
    Partition(PartitionArgs),
    /// Eigenvalues of n^{-1/2} A_{k,n} as CSV, JSON or SVG.
    Spectrum(SpectrumArgs),
    /// Limiting spectral distribution experiment.
    Lsd(LsdArgs),
    /// Gumbel experiment for the spectral radius on n = k^2 + 1.
    Gumbel(GumbelArgs),
    /// Formula spectrum against the dense eigensolver for all small (k, n).
    Verify(VerifyArgs),
    /// Table of P(E1 E2 > x) against its large-x asymptotic.
    Tail(TailArgs),
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    k: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long, required_unless_present = "preset")]
    k: Option<u64>,
    #[arg(long, required_unless_present = "preset")]
    n: Option<u64>,
    /// normal, exponential, rademacher, uniform or delta.
    #[arg(long, default_value = "normal", conflicts_with = "preset")]
    law: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent realizations appended in order.
    #[arg(long, default_value_t = 1)]
    realizations: usize,
    /// One of the figure configurations (fig1-left ... fig3-right).
    #[arg(long, conflicts_with_all = ["k", "n"])]
    preset: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Half-width of the SVG viewport.
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LsdArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// 2 (circle law), 3 (k^g = -1 mod n) or 4 (k^g = 1 mod n).
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    /// Exponent in k^g = -1 or 1 mod n; found automatically when omitted.
    #[arg(long)]
    g: Option<u64>,
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GumbelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// k, with n = k^2 + 1.
    #[arg(long)]
    kk: Option<u64>,
    #[arg(long)]
    law: Option<String>,
    /// Second input law for the universality comparison.
    #[arg(long)]
    universality_law: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial spectral radii as CSV.
    #[arg(long)]
    radii_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 40)]
    nmax: u64,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Perturbs the formula spectrum by fuzz * n to exercise the failure path.
    #[arg(long, default_value_t = 0.0)]
    fuzz: f64,
    /// Random (k, n) pairs with n <= 200 for determinant probes.
    #[arg(long, default_value_t = 20)]
    det_pairs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TailArgs {
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    x: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("KCIRC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("KCIRC_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Partition(a) => cmd_partition(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Lsd(a) => cmd_lsd(a),
        Command::Gumbel(a) => cmd_gumbel(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Tail(a) => cmd_tail(a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = open_output(path)?;
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn parse_law(s: &str) -> Result<InputLaw, CliError> {
    s.parse().map_err(|e: kcirc_core::Error| CliError::Usage(e.to_string()))
}

fn cmd_partition(a: PartitionArgs) -> Result<u8, CliError> {
    if a.n < 2 {
        return Err(CliError::Usage(format!("n must be at least 2, got {}", a.n)));
    }
    let params = decompose(a.n, a.k)?;
    let p = eigen_partition(&params);
    let ups = upsilon_of(&p);
    let paired = p.conjugacy.iter().filter(|c| matches!(c, Conjugacy::PairedWith(_))).count();
    if a.json {
        let value = json!({
            "k": params.k,
            "n": params.n,
            "n_prime": params.n_prime,
            "k_prime": params.k_prime,
            "common_primes": params.common_primes,
            "zero_multiplicity": params.zero_multiplicity(),
            "g1": p.g1,
            "blocks": p.len(),
            "upsilon": ups.to_string(),
            "size_histogram": p.size_histogram(),
            "self_conjugate": p.self_conjugate_count(),
            "paired": paired,
            "partition": p,
        });
        write_text(None, &format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))?;
        return Ok(0);
    }
    let mut out = String::new();
    out.push_str(&format!("n'={} g1={} blocks={} upsilon={}\n", params.n_prime, p.g1, p.len(), ups));
    let primes = if params.common_primes.is_empty() {
        "none".to_string()
    } else {
        params
            .common_primes
            .iter()
            .map(|c| format!("{} (alpha={}, beta={})", c.p, c.alpha, c.beta))
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!("common primes: {primes}\n"));
    out.push_str(&format!("zero multiplicity: {}\n", params.zero_multiplicity()));
    let hist = p
        .size_histogram()
        .iter()
        .map(|(size, count)| format!("{size}x{count}"))
        .collect::<Vec<_>>()
        .join(" ");
    out.push_str(&format!("block sizes: {hist}\n"));
    out.push_str(&format!(
        "conjugacy: {} self-conjugate, {} paired\n",
        p.self_conjugate_count(),
        paired
    ));
    write_text(None, &out)?;
    Ok(0)
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<u8, CliError> {
    let (k, n, law, realizations, title) = match &a.preset {
        Some(name) => {
            let p = figure_preset(name).ok_or_else(|| {
                let names: Vec<&str> = FIGURE_PRESETS.iter().map(|p| p.name).collect();
                CliError::Usage(format!("unknown preset '{name}' (expected one of {})", names.join(", ")))
            })?;
            (p.k, p.n, Some(p.law), p.realizations, format!("{name}: k = {}, n = {}", p.k, p.n))
        }
        None => {
            let (k, n) = (a.k.expect("required by clap"), a.n.expect("required by clap"));
            let law = if a.law == "delta" { None } else { Some(parse_law(&a.law)?) };
            (k, n, law, a.realizations, format!("k = {k}, n = {n}"))
        }
    };
    if n < 2 {
        return Err(CliError::Usage(format!("n must be at least 2, got {n}")));
    }
    let rows: Vec<(Complex64, i64, usize)> = match law {
        Some(law) => scatter_points(k, n, law, realizations.max(1), a.seed)?
            .into_iter()
            .map(|(_, z, b, r)| (z, b, r))
            .collect(),
        None => {
            let s = KCirculant::new(k, n)?.spectrum(&InputSequence::delta(n as usize)?)?;
            let scale = 1.0 / (n as f64).sqrt();
            s.eigenvalues
                .iter()
                .zip(&s.origins)
                .map(|(z, o)| (z * scale, o.block_label(), o.root))
                .collect()
        }
    };
    let out = a.out.as_deref();
    match a.format {
        Format::Csv => {
            let mut w = open_output(out)?;
            write_labelled_points_csv(&mut w, &rows).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        Format::Svg => {
            let points: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
            write_text(out, &svg_scatter(&points, a.extent, &title))?;
        }
        Format::Json => {
            let points: Vec<_> = rows
                .iter()
                .map(|(z, b, r)| json!({"re": z.re, "im": z.im, "block_index": b, "root_index": r}))
                .collect();
            let value = json!({"k": k, "n": n, "points": points});
            write_text(out, &format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))?;
        }
    }
    Ok(0)
}

fn load_file(path: Option<&Path>) -> Result<FileConfig, CliError> {
    path.map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

/// Smallest `g` with `k^g = target mod n`, searched up to the order of `k`.
fn infer_g(k: u64, n: u64, minus: bool) -> Option<u64> {
    if gcd(k, n) != 1 {
        return None;
    }
    let target = if minus { n - 1 } else { 1 % n };
    let mut x = 1 % n;
    for g in 1..=n {
        x = ((x as u128 * k as u128) % n as u128) as u64;
        if x == target {
            return Some(g);
        }
        if x == 1 {
            return None;
        }
    }
    None
}

fn finish_report(report: &ExperimentReport, out: Option<&Path>) -> Result<u8, CliError> {
    write_text(out, &format!("{}\n", report.to_json()))?;
    for c in &report.checks {
        let cmp = match c.comparison {
            kcirc_core::montecarlo::Comparison::Below => "<",
            kcirc_core::montecarlo::Comparison::AtLeast => ">=",
        };
        eprintln!(
            "{} {} = {} ({} {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            short(c.value),
            cmp,
            c.tolerance
        );
    }
    eprintln!("wall clock: {:.2?}", report.wall_clock);
    Ok(if report.pass { 0 } else { 1 })
}

fn short(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.6}")
    }
}

fn cmd_lsd(a: LsdArgs) -> Result<u8, CliError> {
    let file = load_file(a.config.as_deref())?;
    let theorem = a
        .theorem
        .or(file.string("theorem")?)
        .ok_or_else(|| CliError::Usage("--theorem is required (2, 3 or 4)".into()))?;
    let kind: ExperimentKind = theorem
        .parse()
        .map_err(|e: kcirc_core::Error| CliError::Usage(e.to_string()))?;
    if !matches!(
        kind,
        ExperimentKind::LsdTheorem2 | ExperimentKind::LsdTheorem3 | ExperimentKind::LsdTheorem4
    ) {
        return Err(CliError::Usage(format!("lsd supports theorems 2, 3 and 4, got {theorem}")));
    }
    let k = a.k.or(file.u64("k")?).ok_or_else(|| CliError::Usage("--k is required".into()))?;
    let n = a.n.or(file.u64("n")?).ok_or_else(|| CliError::Usage("--n is required".into()))?;
    if n < 2 {
        return Err(CliError::Usage(format!("n must be at least 2, got {n}")));
    }
    let law = parse_law(&a.law.or(file.string("law")?).unwrap_or_else(|| "normal".into()))?;
    let trials = a.trials.or(file.u64("trials")?.map(|t| t as usize)).unwrap_or(5);
    let seed = a.seed.or(file.u64("seed")?).unwrap_or(0);
    let g = match (a.g.or(file.u64("g")?), kind) {
        (Some(g), _) => g,
        (None, ExperimentKind::LsdTheorem2) => 1,
        (None, _) => {
            let minus = kind == ExperimentKind::LsdTheorem3;
            infer_g(k, n, minus).ok_or_else(|| {
                let sign = if minus { "-1" } else { "1" };
                let detail = if gcd(k, n) != 1 {
                    format!("gcd({k}, {n}) = {}", gcd(k, n))
                } else {
                    format!("{k}^2 = {} mod {n}", pow_mod(k, 2, n))
                };
                CliError::Core(kcirc_core::Error::Hypothesis(format!(
                    "no g with k^g = {sign} mod n ({detail})"
                )))
            })?
        }
    };
    let mut config = ExperimentConfig::new(kind, k, n, g, law, trials, seed);
    file.apply_tolerances(&mut config.tolerances)?;
    let report = run_experiment(&config)?;
    finish_report(&report, a.out.as_deref())
}

fn cmd_gumbel(a: GumbelArgs) -> Result<u8, CliError> {
    let file = load_file(a.config.as_deref())?;
    let k = a
        .kk
        .or(file.u64("kk")?)
        .or(file.u64("k")?)
        .ok_or_else(|| CliError::Usage("--kk is required".into()))?;
    if k < 2 {
        return Err(CliError::Usage(format!("--kk must be at least 2, got {k}")));
    }
    let law = parse_law(&a.law.or(file.string("law")?).unwrap_or_else(|| "normal".into()))?;
    let universality = a
        .universality_law
        .or(file.string("universality_law")?)
        .map(|s| parse_law(&s))
        .transpose()?;
    let trials = a.trials.or(file.u64("trials")?.map(|t| t as usize)).unwrap_or(1000);
    let seed = a.seed.or(file.u64("seed")?).unwrap_or(0);
    let mut config = ExperimentConfig::gumbel(k, law, trials, seed);
    config.universality_law = universality;
    file.apply_tolerances(&mut config.tolerances)?;
    let report = run_experiment(&config)?;
    if let Some(path) = a.radii_csv.as_deref() {
        let mut w = open_output(Some(path))?;
        write_radii_csv(&mut w, &report.trials).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    finish_report(&report, a.out.as_deref())
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, CliError> {
    let mut config = ExperimentConfig::oracle_sweep(a.nmax, a.samples, a.seed);
    config.fuzz = a.fuzz;
    config.det_pairs = a.det_pairs;
    let report = oracle_sweep(&config)?;
    eprintln!(
        "{} (k, n) pairs, {} cases, {} failures",
        report.aggregates["pairs"],
        report.aggregates["cases"],
        report.failures.len()
    );
    for f in report.failures.iter().take(20) {
        eprintln!("  k={} n={} seed={}: {}", f.k, f.n, f.seed, f.detail);
    }
    finish_report(&report, a.out.as_deref())
}

fn cmd_tail(a: TailArgs) -> Result<u8, CliError> {
    let mut out = String::from("x\tkbar\tasymptotic\tratio\n");
    for x in a.x {
        if !(x >= 0.0) {
            return Err(CliError::Usage(format!("x must be nonnegative, got {x}")));
        }
        let v = kbar(x)?;
        if x == 0.0 {
            out.push_str(&format!("{x}\t{v:.6}\t-\t-\n"));
        } else {
            let asym = kbar_asymptotic(x);
            out.push_str(&format!("{x}\t{v:.6e}\t{asym:.6e}\t{:.6}\n", v / asym));
        }
    }
    write_text(None, &out)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_smallest_exponent() {
        assert_eq!(infer_g(10, 101, true), Some(2));
        assert_eq!(infer_g(11, 666, true), Some(3));
        assert_eq!(infer_g(11, 665, false), Some(3));
        assert_eq!(infer_g(10, 100, true), None);
        assert_eq!(infer_g(3, 11, true), None);
    }
}
