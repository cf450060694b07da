//! Experiment orchestration: input laws, per-trial seeding, parallel trial
//! sweeps and JSON-ready reports for the LSD, Gumbel and oracle experiments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremes::{block_count, iid_max_reference, normalization, standardize_radius};
use crate::limits::{
    angular_test, band_mass, degenerate_radius, esd, ks_radial, ks_statistic, ks_two_sample, AngularStat,
    LsdLaw,
};
use crate::numtheory::{
    classify_regime, decompose, eigen_partition, gcd, smallest_prime_divisor, upsilon_of, RegimeCase,
};
use crate::seeds::{derive_trial_seed, substream, trial_rng};
use crate::spectral::dense::{dense_spectrum_oracle, det_probe_oracle, DENSE_EIGEN_MAX, DET_PROBE_MAX};
use crate::spectral::{build_matrix, spectra_match, InputSequence, KCirculant};

/// Largest `n` accepted by the DFT-based experiments.
pub const DFT_EXPERIMENT_MAX: u64 = 200_000;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Law of the i.i.d. input entries `a_l`. Every variant has mean 0 and
/// variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputLaw {
    StandardNormal,
    /// `Exp(1) - 1`
    CenteredExponential,
    Rademacher,
    /// Uniform on `(-sqrt 3, sqrt 3)`.
    Uniform,
}

impl InputLaw {
    pub const ALL: [InputLaw; 4] = [
        InputLaw::StandardNormal,
        InputLaw::CenteredExponential,
        InputLaw::Rademacher,
        InputLaw::Uniform,
    ];

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InputLaw::StandardNormal => StandardNormal.sample(rng),
            InputLaw::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            InputLaw::Rademacher => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            InputLaw::Uniform => rng.random_range(-SQRT3..SQRT3),
        }
    }

    pub fn sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<InputSequence> {
        InputSequence::new((0..n).map(|_| self.sample(rng)).collect())
    }

    /// `E a^4`.
    pub fn fourth_moment(&self) -> f64 {
        match self {
            InputLaw::StandardNormal => 3.0,
            InputLaw::CenteredExponential => 9.0,
            InputLaw::Rademacher => 1.0,
            InputLaw::Uniform => 1.8,
        }
    }

    /// `E |a|^3`, the `2 + delta` moment with `delta = 1`.
    pub fn abs_third_moment(&self) -> f64 {
        match self {
            InputLaw::StandardNormal => 1.595_769_121_605_730_7,
            InputLaw::CenteredExponential => 2.414_553_294_057_307_9,
            InputLaw::Rademacher => 1.0,
            InputLaw::Uniform => 1.299_038_105_676_658,
        }
    }

    /// Sample mean, variance and `E|a|^3` over `draws` values, with the mean
    /// and variance judged against 3-sigma bands.
    pub fn moment_check<R: Rng + ?Sized>(&self, draws: usize, rng: &mut R) -> MomentCheck {
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let x = self.sample(rng);
            s1 += x;
            s2 += x * x;
            s3 += x.abs().powi(3);
        }
        let m = draws as f64;
        let mean = s1 / m;
        // Second moment about the known mean 0, so the band is exact even for
        // Rademacher input where it has zero spread.
        let variance = s2 / m;
        let mean_band = 3.0 / m.sqrt();
        let variance_band = 3.0 * ((self.fourth_moment() - 1.0) / m).sqrt();
        MomentCheck {
            draws,
            mean,
            variance,
            abs_moment_3: s3 / m,
            mean_ok: mean.abs() <= mean_band,
            variance_ok: (variance - 1.0).abs() <= variance_band,
        }
    }
}

impl fmt::Display for InputLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputLaw::StandardNormal => "standard_normal",
            InputLaw::CenteredExponential => "centered_exponential",
            InputLaw::Rademacher => "rademacher",
            InputLaw::Uniform => "uniform",
        })
    }
}

impl FromStr for InputLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "standard_normal" | "normal" | "gaussian" => Ok(InputLaw::StandardNormal),
            "centered_exponential" | "exponential" | "exp" => Ok(InputLaw::CenteredExponential),
            "rademacher" => Ok(InputLaw::Rademacher),
            "uniform" => Ok(InputLaw::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown input law '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub draws: usize,
    pub mean: f64,
    pub variance: f64,
    pub abs_moment_3: f64,
    pub mean_ok: bool,
    pub variance_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Degenerate circle law, `gcd(k, n) = 1` and `k` small.
    LsdTheorem2,
    /// `k^g = -1 + s n`: product radius on the `2g`-th roots of unity.
    LsdTheorem3,
    /// `k^g = 1 + s n`: product radius with uniform angle.
    LsdTheorem4,
    /// `n = k^2 + 1`: Gumbel law of the spectral radius.
    GumbelTheorem5,
    OracleSweep,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "lsd_theorem2" => Ok(ExperimentKind::LsdTheorem2),
            "3" | "lsd_theorem3" => Ok(ExperimentKind::LsdTheorem3),
            "4" | "lsd_theorem4" => Ok(ExperimentKind::LsdTheorem4),
            "5" | "gumbel_theorem5" => Ok(ExperimentKind::GumbelTheorem5),
            "oracle_sweep" => Ok(ExperimentKind::OracleSweep),
            other => Err(Error::InvalidArgument(format!("unknown experiment kind '{other}'"))),
        }
    }
}

/// Pass thresholds. Defaults come from calibration runs; see
/// [`Tolerances::for_kind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Upper bound on the seed-averaged radial KS distance.
    pub radial_ks: f64,
    /// Upper bound on every argument's distance to the `pi / g` grid.
    pub angular_grid: f64,
    /// Upper bound on the seed-averaged angular KS distance to uniform.
    pub angular_uniform_ks: f64,
    pub band_radius: f64,
    pub band_epsilon: f64,
    /// Lower bound on the annulus mass in every trial.
    pub band_mass_min: f64,
    pub gumbel_ks_lambda: f64,
    pub gumbel_ks_reference: f64,
    pub universality_ks: f64,
    /// Spectra must match to `oracle_factor * n`.
    pub oracle_factor: f64,
    pub det_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            radial_ks: 0.05,
            angular_grid: 1e-9,
            angular_uniform_ks: 0.06,
            band_radius: degenerate_radius(),
            band_epsilon: 0.05,
            band_mass_min: 0.9,
            gumbel_ks_lambda: 0.15,
            gumbel_ks_reference: 0.08,
            universality_ks: 0.08,
            oracle_factor: 1e-7,
            det_relative: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let base = Self::default();
        match kind {
            ExperimentKind::LsdTheorem4 => Self {
                radial_ks: 0.06,
                ..base
            },
            _ => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k: u64,
    /// Dimension; for [`ExperimentKind::OracleSweep`] the largest `n` swept.
    pub n: u64,
    pub g: u64,
    pub law: InputLaw,
    /// Trials, or samples per `(k, n)` pair for the oracle sweep.
    pub trials: usize,
    pub master_seed: u64,
    pub tolerances: Tolerances,
    /// Second input law for the Gumbel universality comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universality_law: Option<InputLaw>,
    /// Oracle sweep only: pairs sampled for determinant probes.
    #[serde(default)]
    pub det_pairs: usize,
    /// Oracle sweep only: deliberate perturbation of the formula spectrum.
    #[serde(default)]
    pub fuzz: f64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, k: u64, n: u64, g: u64, law: InputLaw, trials: usize, master_seed: u64) -> Self {
        Self {
            kind,
            k,
            n,
            g,
            law,
            trials,
            master_seed,
            tolerances: Tolerances::for_kind(kind),
            universality_law: None,
            det_pairs: 0,
            fuzz: 0.0,
        }
    }

    /// Gumbel configuration on `n = k^2 + 1`.
    pub fn gumbel(k: u64, law: InputLaw, trials: usize, master_seed: u64) -> Self {
        Self::new(ExperimentKind::GumbelTheorem5, k, k * k + 1, 2, law, trials, master_seed)
    }

    pub fn oracle_sweep(n_max: u64, samples: usize, master_seed: u64) -> Self {
        Self {
            det_pairs: 20,
            ..Self::new(ExperimentKind::OracleSweep, 0, n_max, 1, InputLaw::StandardNormal, samples, master_seed)
        }
    }
}

/// Audit record of the hypothesis check that gates an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub congruence: String,
    pub gcd_kn: u64,
    pub g1: u64,
    pub upsilon: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<u64>,
    /// `s / n^{p1 - 1}`, which the theorems need to vanish asymptotically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_over_n_p1_minus_1: Option<f64>,
    /// `ln k / ln n` for the degenerate law, which needs `k = n^{o(1)}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_k_over_log_n: Option<f64>,
}

fn reject(msg: String) -> Error {
    Error::Hypothesis(msg)
}

/// Validates the theorem hypothesis for `config` and echoes the concrete
/// values that the asymptotic side conditions refer to.
pub fn check_hypothesis(config: &ExperimentConfig) -> Result<HypothesisReport> {
    let (k, n, g) = (config.k, config.n, config.g);
    if config.kind == ExperimentKind::OracleSweep {
        return Err(Error::InvalidArgument("the oracle sweep has no hypothesis".into()));
    }
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if n > DFT_EXPERIMENT_MAX {
        return Err(Error::ResourceCap(format!(
            "n = {n} exceeds the experiment cap {DFT_EXPERIMENT_MAX}"
        )));
    }
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if k == 0 || k >= n {
        return Err(reject(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let d = gcd(k, n);
    if d != 1 {
        return Err(reject(format!("gcd(k, n) = gcd({k}, {n}) = {d}, expected 1")));
    }
    let params = decompose(n, k)?;
    let partition = eigen_partition(&params);
    let mut report = HypothesisReport {
        congruence: String::new(),
        gcd_kn: d,
        g1: partition.g1,
        upsilon: upsilon_of(&partition).to_string(),
        s: None,
        p1: None,
        s_over_n_p1_minus_1: None,
        log_k_over_log_n: None,
    };
    match config.kind {
        ExperimentKind::LsdTheorem2 => {
            if k < 2 {
                return Err(reject(format!("the circle law needs k >= 2, got k = {k}")));
            }
            report.congruence = format!("gcd({k}, {n}) = 1");
            report.log_k_over_log_n = Some((k as f64).ln() / (n as f64).ln());
        }
        ExperimentKind::LsdTheorem3 | ExperimentKind::LsdTheorem4 | ExperimentKind::GumbelTheorem5 => {
            let minus = config.kind != ExperimentKind::LsdTheorem4;
            let sign = if minus { "-1" } else { "1" };
            if config.kind == ExperimentKind::GumbelTheorem5 {
                if g != 2 || n != k * k + 1 {
                    return Err(reject(format!(
                        "the Gumbel experiment needs n = k^2 + 1 (g = 2), got k = {k}, n = {n}, g = {g}"
                    )));
                }
                check_gumbel_partition(&partition)?;
            }
            if g == 0 {
                return Err(Error::InvalidArgument("g must be at least 1".into()));
            }
            let regime = classify_regime(g, k, n)?;
            let s = match (regime.case, minus) {
                (RegimeCase::MinusOne { s }, true) | (RegimeCase::PlusOne { s }, false) => s,
                _ => {
                    let r = crate::numtheory::pow_mod(k, g, n);
                    return Err(reject(format!(
                        "k^g = {sign} mod n fails: {k}^{g} = {r} mod {n}"
                    )));
                }
            };
            report.congruence = format!("{k}^{g} = {sign} + {s} * {n}");
            report.s = Some(s.to_string());
            if g == 1 {
                let expected = if minus { 1 } else { 0 };
                if s != expected {
                    return Err(reject(format!("g = 1 needs s = {expected}, got s = {s}")));
                }
            } else {
                let p1 = smallest_prime_divisor(g).expect("g > 1 has a prime divisor");
                report.p1 = Some(p1);
                report.s_over_n_p1_minus_1 = Some(s as f64 / (n as f64).powi(p1 as i32 - 1));
            }
        }
        ExperimentKind::OracleSweep => unreachable!(),
    }
    Ok(report)
}

/// The Gumbel reduction needs every block but `{0}` (and `{n/2}`) to have
/// exactly four elements.
fn check_gumbel_partition(partition: &crate::numtheory::EigenPartition) -> Result<()> {
    let n = partition.n_prime;
    for block in &partition.blocks {
        let lower = block.len() == 1 && (block[0] == 0 || 2 * block[0] == n);
        if block.len() != 4 && !lower {
            return Err(reject(format!(
                "partition of Z_{n} has a block of size {} (containing {}); expected size 4",
                block.len(),
                block[0]
            )));
        }
    }
    Ok(())
}

/// Statistics of a single trial; fields not relevant to the experiment are
/// omitted from the JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub trial: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_ks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grid_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_direction_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_ks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardized: Option<f64>,
}

impl TrialStats {
    fn new(trial: usize, seed: u64) -> Self {
        Self {
            trial,
            seed,
            radial_ks: None,
            max_grid_deviation: None,
            per_direction_counts: None,
            uniform_ks: None,
            band_mass: None,
            spectral_radius: None,
            standardized: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::Below,
            tolerance,
            pass: value < tolerance,
        }
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            tolerance,
            pass: value >= tolerance,
        }
    }
}

/// A `(k, n, seed)` case where the formula and dense spectra disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFailure {
    pub k: u64,
    pub n: u64,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<HypothesisReport>,
    pub trials: Vec<TrialStats>,
    pub aggregates: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<OracleFailure>,
    pub pass: bool,
    /// Kept out of the JSON so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn summarize(aggregates: &mut BTreeMap<String, f64>, name: &str, values: &[f64]) {
    if values.is_empty() {
        return;
    }
    aggregates.insert(format!("{name}_mean"), mean(values));
    aggregates.insert(format!("{name}_max"), max(values));
    aggregates.insert(format!("{name}_min"), min(values));
}

fn collect<F: Fn(&TrialStats) -> Option<f64>>(trials: &[TrialStats], f: F) -> Vec<f64> {
    trials.iter().filter_map(f).collect()
}

fn trial_input(law: InputLaw, n: usize, master_seed: u64, trial: usize) -> Result<(u64, InputSequence)> {
    let seed = derive_trial_seed(master_seed, trial as u64);
    let mut rng = trial_rng(master_seed, trial as u64);
    Ok((seed, law.sequence(n, &mut rng)?))
}

/// Runs an LSD experiment (kinds 2, 3 and 4): per trial, spectrum through
/// the DFT, then radial KS and angular statistics (product laws) or annulus
/// mass (circle law).
pub fn run_lsd_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let law = match config.kind {
        ExperimentKind::LsdTheorem2 => LsdLaw::DegenerateCircle {
            radius: config.tolerances.band_radius,
        },
        ExperimentKind::LsdTheorem3 => LsdLaw::RootsOfUnityProduct {
            g: u32::try_from(config.g).map_err(|_| Error::Overflow("g"))?,
        },
        ExperimentKind::LsdTheorem4 => LsdLaw::UniformCircleProduct {
            g: u32::try_from(config.g).map_err(|_| Error::Overflow("g"))?,
        },
        _ => return Err(Error::InvalidArgument("not an LSD experiment".into())),
    };
    let hypothesis = check_hypothesis(config)?;
    let kc = KCirculant::new(config.k, config.n)?;
    let tol = config.tolerances;
    let trials: Vec<TrialStats> = (0..config.trials)
        .into_par_iter()
        .map(|i| -> Result<TrialStats> {
            let (seed, a) = trial_input(config.law, kc.n(), config.master_seed, i)?;
            let sample = esd(&kc.spectrum(&a)?);
            let mut stats = TrialStats::new(i, seed);
            match law {
                LsdLaw::DegenerateCircle { radius } => {
                    stats.band_mass = Some(band_mass(&sample, radius, tol.band_epsilon));
                }
                _ => stats.radial_ks = Some(ks_radial(&sample, &law)?),
            }
            match angular_test(&sample, &law)? {
                AngularStat::Grid {
                    max_grid_deviation,
                    per_direction_counts,
                } => {
                    stats.max_grid_deviation = Some(max_grid_deviation);
                    stats.per_direction_counts = Some(per_direction_counts);
                }
                AngularStat::Uniform { uniform_ks } => stats.uniform_ks = Some(uniform_ks),
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;

    let mut aggregates = BTreeMap::new();
    let radial = collect(&trials, |t| t.radial_ks);
    let grid = collect(&trials, |t| t.max_grid_deviation);
    let uniform = collect(&trials, |t| t.uniform_ks);
    let band = collect(&trials, |t| t.band_mass);
    summarize(&mut aggregates, "radial_ks", &radial);
    summarize(&mut aggregates, "max_grid_deviation", &grid);
    summarize(&mut aggregates, "uniform_ks", &uniform);
    summarize(&mut aggregates, "band_mass", &band);

    let mut checks = Vec::new();
    match config.kind {
        ExperimentKind::LsdTheorem2 => {
            checks.push(Check::at_least("band_mass_min", min(&band), tol.band_mass_min));
        }
        ExperimentKind::LsdTheorem3 => {
            checks.push(Check::below("max_grid_deviation", max(&grid), tol.angular_grid));
            checks.push(Check::below("radial_ks_mean", mean(&radial), tol.radial_ks));
        }
        ExperimentKind::LsdTheorem4 => {
            checks.push(Check::below("uniform_ks_mean", mean(&uniform), tol.angular_uniform_ks));
            checks.push(Check::below("radial_ks_mean", mean(&radial), tol.radial_ks));
        }
        _ => unreachable!(),
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        config: config.clone(),
        hypothesis: Some(hypothesis),
        trials,
        aggregates,
        checks,
        failures: Vec::new(),
        pass,
        wall_clock: start.elapsed(),
    })
}

const REFERENCE_STREAM: u64 = 1;
const UNIVERSALITY_STREAM: u64 = 2;

fn standardized_radii(
    kc: &KCirculant,
    law: InputLaw,
    master_seed: u64,
    trials: usize,
) -> Result<Vec<TrialStats>> {
    let q = block_count(kc.n() as u64);
    let norm = normalization(q)?;
    let scale = 1.0 / (kc.n() as f64).sqrt();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (seed, a) = trial_input(law, kc.n(), master_seed, i)?;
            let sp = kc.spectral_radius(&a)? * scale;
            let mut stats = TrialStats::new(i, seed);
            stats.spectral_radius = Some(sp);
            stats.standardized = Some(standardize_radius(sp, &norm));
            Ok(stats)
        })
        .collect()
}

/// Runs the Gumbel experiment on `n = k^2 + 1`: standardized spectral radii
/// of `n^{-1/2} A`, compared with the standard Gumbel law, with an i.i.d.
/// maximum reference sample of equal size, and optionally with a second
/// input law.
pub fn run_gumbel_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    if config.kind != ExperimentKind::GumbelTheorem5 {
        return Err(Error::InvalidArgument("not a Gumbel experiment".into()));
    }
    let hypothesis = check_hypothesis(config)?;
    let kc = KCirculant::new(config.k, config.n)?;
    let trials = standardized_radii(&kc, config.law, config.master_seed, config.trials)?;
    let z = collect(&trials, |t| t.standardized);
    let sp = collect(&trials, |t| t.spectral_radius);
    let q = block_count(config.n);
    let norm = normalization(q)?;
    let tol = config.tolerances;

    let mut aggregates = BTreeMap::new();
    aggregates.insert("q".into(), q as f64);
    aggregates.insert("c_q".into(), norm.c_q);
    aggregates.insert("d_q".into(), norm.d_q);
    summarize(&mut aggregates, "spectral_radius", &sp);
    summarize(&mut aggregates, "standardized", &z);
    let mut checks = Vec::new();
    if z.len() > 1 {
        let ks_lambda = ks_statistic(&z, |x| Ok(crate::extremes::gumbel_cdf(x, 1.0)))?;
        checks.push(Check::below("ks_to_gumbel", ks_lambda, tol.gumbel_ks_lambda));
        let reference = iid_max_reference(q, z.len(), substream(config.master_seed, REFERENCE_STREAM))?;
        let ks_ref = ks_two_sample(&z, &reference)?;
        checks.push(Check::below("ks_to_iid_reference", ks_ref, tol.gumbel_ks_reference));
        if let Some(other) = config.universality_law {
            let seed = substream(config.master_seed, UNIVERSALITY_STREAM);
            let alt = standardized_radii(&kc, other, seed, config.trials)?;
            let z_alt = collect(&alt, |t| t.standardized);
            summarize(&mut aggregates, "universality_standardized", &z_alt);
            let ks_univ = ks_two_sample(&z, &z_alt)?;
            checks.push(Check::below("ks_universality", ks_univ, tol.universality_ks));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        config: config.clone(),
        hypothesis: Some(hypothesis),
        trials,
        aggregates,
        checks,
        failures: Vec::new(),
        pass,
        wall_clock: start.elapsed(),
    })
}

/// Dispatches on `config.kind`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::GumbelTheorem5 => run_gumbel_experiment(config),
        ExperimentKind::OracleSweep => oracle_sweep(config),
        _ => run_lsd_experiment(config),
    }
}

struct SweepCase {
    k: u64,
    n: u64,
    seed: u64,
    distance: f64,
    zeros_ok: bool,
    failure: Option<String>,
}

fn sweep_case(k: u64, n: u64, sample: usize, master_seed: u64, fuzz: f64, tol: f64) -> Result<SweepCase> {
    let index = (n << 40) | (k << 20) | sample as u64;
    let seed = derive_trial_seed(master_seed, index);
    let mut rng = trial_rng(master_seed, index);
    let a = InputLaw::StandardNormal.sequence(n as usize, &mut rng)?;
    let kc = KCirculant::new(k, n)?;
    let formula = kc.spectrum(&a)?;
    let mut eigen = formula.eigenvalues.clone();
    if fuzz != 0.0 {
        if let Some(last) = eigen.last_mut() {
            *last += Complex64::new(fuzz * n as f64, 0.0);
        }
    }
    let dense = dense_spectrum_oracle(&build_matrix(&a, k, n as usize)?)?;
    let outcome = spectra_match(&eigen, &dense, tol)?;
    let expected_zeros = kc.params().zero_multiplicity() as usize;
    let dense_zeros = dense.iter().filter(|z| z.norm() <= tol).count();
    let zeros_ok = formula.zero_multiplicity == expected_zeros && dense_zeros >= expected_zeros;
    let failure = if !outcome.matched {
        Some(format!("max pair distance {:e} exceeds {:e}", outcome.max_pair_distance, tol))
    } else if !zeros_ok {
        Some(format!(
            "zero multiplicity: formula {}, dense {}, expected n - n' = {}",
            formula.zero_multiplicity, dense_zeros, expected_zeros
        ))
    } else {
        None
    };
    Ok(SweepCase {
        k,
        n,
        seed,
        distance: outcome.max_pair_distance,
        zeros_ok,
        failure,
    })
}

/// Largest `n` sampled by the determinant probes of the sweep.
pub const DET_SWEEP_N_MAX: u64 = 200;
const DET_POINTS: usize = 10;

struct DetCase {
    k: u64,
    n: u64,
    seed: u64,
    worst: f64,
}

/// Probe points are drawn in the box `|re|, |im| <= 1.5 sqrt(n)` and redrawn
/// when they fall within `0.01 sqrt(n)` of an eigenvalue, where the
/// determinant is too small to compare in relative terms.
fn det_case(pair: usize, master_seed: u64) -> Result<DetCase> {
    let seed = derive_trial_seed(master_seed, pair as u64);
    let mut rng = trial_rng(master_seed, pair as u64);
    let n = rng.random_range(2..=DET_SWEEP_N_MAX.min(DET_PROBE_MAX as u64));
    let k = rng.random_range(1..n);
    let a = InputLaw::StandardNormal.sequence(n as usize, &mut rng)?;
    let spectrum = KCirculant::new(k, n)?.spectrum(&a)?;
    let root_n = (n as f64).sqrt();
    let mut points = Vec::with_capacity(DET_POINTS);
    while points.len() < DET_POINTS {
        let z = Complex64::new(
            rng.random_range(-1.5..1.5) * root_n,
            rng.random_range(-1.5..1.5) * root_n,
        );
        let nearest = spectrum
            .eigenvalues
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min);
        if nearest > 0.01 * root_n {
            points.push(z);
        }
    }
    let probes = det_probe_oracle(&a, k, n as usize, &points)?;
    let worst = probes.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    Ok(DetCase { k, n, seed, worst })
}

/// Formula spectrum against the dense eigensolver for every `(k, n)` with
/// `2 <= n <= n_max` and `1 <= k < n`, `trials` Gaussian samples each, then
/// determinant probes on `det_pairs` random pairs with `n <= 200`.
pub fn oracle_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n_max = config.n;
    if n_max < 2 {
        return Err(Error::DimensionTooSmall(n_max));
    }
    if n_max as usize > DENSE_EIGEN_MAX {
        return Err(Error::ResourceCap(format!(
            "dense oracle limited to n <= {DENSE_EIGEN_MAX}, got {n_max}"
        )));
    }
    let samples = config.trials.max(1);
    let cases: Vec<(u64, u64, usize)> = (2..=n_max)
        .flat_map(|n| (1..n).flat_map(move |k| (0..samples).map(move |s| (k, n, s))))
        .collect();
    let factor = config.tolerances.oracle_factor;
    let results: Vec<SweepCase> = cases
        .par_iter()
        .map(|&(k, n, s)| sweep_case(k, n, s, config.master_seed, config.fuzz, factor * n as f64))
        .collect::<Result<_>>()?;
    let det_seed = substream(config.master_seed, REFERENCE_STREAM);
    let dets: Vec<DetCase> = (0..config.det_pairs)
        .into_par_iter()
        .map(|p| det_case(p, det_seed))
        .collect::<Result<_>>()?;

    let mut failures: Vec<OracleFailure> = results
        .iter()
        .filter_map(|c| {
            c.failure.as_ref().map(|detail| OracleFailure {
                k: c.k,
                n: c.n,
                seed: c.seed,
                detail: detail.clone(),
            })
        })
        .collect();
    let det_tol = config.tolerances.det_relative;
    failures.extend(dets.iter().filter(|d| !(d.worst < det_tol)).map(|d| OracleFailure {
        k: d.k,
        n: d.n,
        seed: d.seed,
        detail: format!("determinant relative error {:e} exceeds {:e}", d.worst, det_tol),
    }));

    let pairs = (n_max * (n_max - 1) / 2) as f64;
    let worst_scaled = results
        .iter()
        .map(|c| c.distance / c.n as f64)
        .fold(0.0, f64::max);
    let mut aggregates = BTreeMap::new();
    aggregates.insert("pairs".into(), pairs);
    aggregates.insert("cases".into(), results.len() as f64);
    aggregates.insert(
        "spectrum_mismatches".into(),
        results.iter().filter(|c| c.failure.is_some()).count() as f64,
    );
    aggregates.insert(
        "zero_multiplicity_failures".into(),
        results.iter().filter(|c| !c.zeros_ok).count() as f64,
    );
    aggregates.insert("max_distance_over_n".into(), worst_scaled);
    aggregates.insert("det_pairs".into(), dets.len() as f64);
    if !dets.is_empty() {
        let worst_det = dets.iter().map(|d| d.worst).fold(0.0, f64::max);
        aggregates.insert("det_max_relative_error".into(), worst_det);
    }
    let mut checks = vec![Check::below("max_distance_over_n", worst_scaled, factor)];
    if let Some(&w) = aggregates.get("det_max_relative_error") {
        checks.push(Check::below("det_max_relative_error", w, det_tol));
    }
    let pass = failures.is_empty() && checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        config: config.clone(),
        hypothesis: None,
        trials: Vec::new(),
        aggregates,
        checks,
        failures,
        pass,
        wall_clock: start.elapsed(),
    })
}

/// Scatter configurations from the figures; their output is point data
/// only, with no pass/fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FigurePreset {
    pub name: &'static str,
    pub k: u64,
    pub n: u64,
    pub law: InputLaw,
    pub realizations: usize,
}

pub const FIGURE_PRESETS: [FigurePreset; 6] = [
    FigurePreset {
        name: "fig1-left",
        k: 1,
        n: 901,
        law: InputLaw::StandardNormal,
        realizations: 100,
    },
    FigurePreset {
        name: "fig1-right",
        k: 2,
        n: 901,
        law: InputLaw::StandardNormal,
        realizations: 100,
    },
    // 11^3 = 1331 = -1 + 2 * 666
    FigurePreset {
        name: "fig2-left",
        k: 11,
        n: 666,
        law: InputLaw::CenteredExponential,
        realizations: 20,
    },
    // 11^3 = 1331 = 1 + 2 * 665
    FigurePreset {
        name: "fig2-right",
        k: 11,
        n: 665,
        law: InputLaw::CenteredExponential,
        realizations: 20,
    },
    FigurePreset {
        name: "fig3-left",
        k: 16,
        n: 253,
        law: InputLaw::StandardNormal,
        realizations: 100,
    },
    FigurePreset {
        name: "fig3-right",
        k: 16,
        n: 259,
        law: InputLaw::StandardNormal,
        realizations: 100,
    },
];

pub fn figure_preset(name: &str) -> Option<FigurePreset> {
    FIGURE_PRESETS.iter().copied().find(|p| p.name == name)
}

/// One realization of `n^{-1/2} A_{k,n}` per trial, concatenated in trial
/// order: `(trial, point, block label, root index)`.
pub fn scatter_points(
    k: u64,
    n: u64,
    law: InputLaw,
    realizations: usize,
    master_seed: u64,
) -> Result<Vec<(usize, Complex64, i64, usize)>> {
    if n > DFT_EXPERIMENT_MAX {
        return Err(Error::ResourceCap(format!(
            "n = {n} exceeds the experiment cap {DFT_EXPERIMENT_MAX}"
        )));
    }
    let kc = KCirculant::new(k, n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let per_trial: Vec<Vec<(usize, Complex64, i64, usize)>> = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let (_, a) = trial_input(law, kc.n(), master_seed, i)?;
            let s = kc.spectrum(&a)?;
            Ok(s.eigenvalues
                .iter()
                .zip(&s.origins)
                .map(|(z, o)| (i, z * scale, o.block_label(), o.root))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}
