//! Limiting spectral laws of `n^{-1/2} A_{k,n}` and distances from an
//! empirical spectrum to them.
//!
//! The product laws put the radius `(E_1 ... E_g)^{1/2g}` (i.i.d. unit
//! exponentials) on either the `2g`-th roots of unity or a uniform angle. The
//! degenerate law is the uniform distribution on a circle of radius
//! `exp(E[log sqrt(E)]) = e^{-gamma/2}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::spectral::SpectrumResult;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^{-gamma/2}`, the radius of the degenerate circle law.
pub fn degenerate_radius() -> f64 {
    (-EULER_GAMMA / 2.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LsdLaw {
    RootsOfUnityProduct { g: u32 },
    UniformCircleProduct { g: u32 },
    DegenerateCircle { radius: f64 },
}

impl LsdLaw {
    pub fn degenerate() -> Self {
        LsdLaw::DegenerateCircle {
            radius: degenerate_radius(),
        }
    }

    pub fn product_order(&self) -> Option<u32> {
        match *self {
            LsdLaw::RootsOfUnityProduct { g } | LsdLaw::UniformCircleProduct { g } => Some(g),
            LsdLaw::DegenerateCircle { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LsdLaw::RootsOfUnityProduct { g } | LsdLaw::UniformCircleProduct { g } if g == 0 => {
                Err(Error::InvalidArgument("product law needs g >= 1".into()))
            }
            LsdLaw::DegenerateCircle { radius } if !(radius > 0.0) => {
                Err(Error::InvalidArgument("circle radius must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

fn tail_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        initial_panels: 24,
        max_panels: 2000,
    }
}

// In u = ln t the integrand e^{u - e^u} P(y e^{-u}) is below 1e-17 of its
// peak outside this window.
const U_LO: f64 = -40.0;
const U_HI: f64 = 6.7;

/// `P(E_1 ... E_g > y)` by the recursion
/// `P_g(y) = int_0^inf e^{-t} P_{g-1}(y / t) dt`, `P_1(y) = e^{-y}`,
/// integrated on `t = e^u`.
pub fn radial_tail(g: u32, y: f64) -> Result<f64> {
    if g == 0 {
        return Err(Error::InvalidArgument("radial_tail needs g >= 1".into()));
    }
    if !(y >= 0.0) {
        return Err(Error::InvalidArgument(format!("radial_tail needs y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    if g == 1 {
        return Ok((-y).exp());
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    let inner_err = std::cell::Cell::new(None);
    let integrand = |u: f64| {
        let t = u.exp();
        let weight = (u - t).exp();
        if weight == 0.0 {
            return 0.0;
        }
        match radial_tail(g - 1, y / t) {
            Ok(p) => weight * p,
            Err(e) => {
                inner_err.set(Some(e));
                0.0
            }
        }
    };
    let r = integrate(integrand, U_LO, U_HI, tail_options())?;
    if let Some(e) = inner_err.take() {
        return Err(e);
    }
    Ok(r.value.clamp(0.0, 1.0))
}

/// Radial CDF of a product law: `P((E_1 ... E_g)^{1/2g} <= x)`.
pub fn lsd_radial_cdf(law: &LsdLaw, x: f64) -> Result<f64> {
    law.validate()?;
    let g = law.product_order().ok_or_else(|| {
        Error::InvalidArgument("the degenerate circle has a point-mass radius; use band_mass".into())
    })?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - radial_tail(g, x.powi(2 * g as i32))?)
}

/// Draws `m` points from `law`, radius and angle independent.
pub fn lsd_sample<R: Rng + ?Sized>(law: &LsdLaw, m: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    law.validate()?;
    let radius = |rng: &mut R, g: u32| -> f64 {
        let product: f64 = (0..g).map(|_| -> f64 { Exp1.sample(rng) }).product();
        product.powf(1.0 / (2.0 * g as f64))
    };
    Ok((0..m)
        .map(|_| match *law {
            LsdLaw::RootsOfUnityProduct { g } => {
                let r = radius(rng, g);
                let j = rng.random_range(0..2 * g);
                Complex64::from_polar(r, PI * j as f64 / g as f64)
            }
            LsdLaw::UniformCircleProduct { g } => {
                let r = radius(rng, g);
                Complex64::from_polar(r, rng.random_range(0.0..TAU))
            }
            LsdLaw::DegenerateCircle { radius: r } => Complex64::from_polar(r, rng.random_range(0.0..TAU)),
        })
        .collect())
}

/// Eigenvalues of `n^{-1/2} A_{k,n}`. Structural zeros (`n - n'` of them) are
/// kept out of `points` and counted in `excluded_zeros`; `zeros_in_measure`
/// records whether the ESD as a measure puts them back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsdSample {
    pub points: Vec<Complex64>,
    pub n: usize,
    pub excluded_zeros: usize,
    pub zeros_in_measure: bool,
}

impl EsdSample {
    pub fn from_points(points: Vec<Complex64>) -> Self {
        let n = points.len();
        Self {
            points,
            n,
            excluded_zeros: 0,
            zeros_in_measure: true,
        }
    }

    /// All `n` atoms of the ESD when zeros are part of the measure, otherwise
    /// just the nonstructural points.
    pub fn measure_points(&self) -> Vec<Complex64> {
        let mut out = self.points.clone();
        if self.zeros_in_measure {
            out.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), self.excluded_zeros));
        }
        out
    }
}

/// Scales a spectrum by `n^{-1/2}` and separates the structural zeros.
pub fn esd(spectrum: &SpectrumResult) -> EsdSample {
    let scale = 1.0 / (spectrum.n as f64).sqrt();
    let points = spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.origins)
        .filter(|(_, o)| o.block.is_some())
        .map(|(z, _)| z * scale)
        .collect();
    EsdSample {
        points,
        n: spectrum.n,
        excluded_zeros: spectrum.zero_multiplicity,
        zeros_in_measure: true,
    }
}

/// Exact two-sided one-sample Kolmogorov-Smirnov distance of `values`
/// against a continuous CDF.
pub fn ks_statistic<F>(values: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// KS distance between the moduli of the sample points and the law's radial CDF.
pub fn ks_radial(sample: &EsdSample, law: &LsdLaw) -> Result<f64> {
    law.validate()?;
    if law.product_order().is_none() {
        return Err(Error::InvalidArgument(
            "radial KS needs a product law; use band_mass for the circle law".into(),
        ));
    }
    let radii: Vec<f64> = sample.points.iter().map(|z| z.norm()).collect();
    if law.product_order().unwrap_or(0) >= 3 && radii.len() > TABLE_MIN_POINTS {
        let table = RadialTable::new(law, &radii)?;
        return ks_statistic(&radii, |x| Ok(table.cdf(x)));
    }
    ks_statistic(&radii, |x| lsd_radial_cdf(law, x))
}

// Past g = 2 each exact CDF value is a nested quadrature of a few
// milliseconds, so large samples read it from a table instead.
const TABLE_MIN_POINTS: usize = 1024;
const TABLE_NODES: usize = 1024;

/// The radial CDF on a uniform grid in `ln x` covering the sample, read back
/// by cubic (Catmull-Rom) interpolation. The grid carries one extra node on
/// each side so every covered point has four neighbours.
struct RadialTable {
    u0: f64,
    h: f64,
    values: Vec<f64>,
}

impl RadialTable {
    fn new(law: &LsdLaw, radii: &[f64]) -> Result<Self> {
        let positive = radii.iter().copied().filter(|&r| r > 0.0);
        let lo = positive.clone().fold(f64::INFINITY, f64::min);
        let hi = positive.fold(0.0, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo.ln(), hi.ln()) } else { (0.0, 0.0) };
        let h = ((hi - lo) / (TABLE_NODES - 1) as f64).max(1e-9);
        let u0 = lo - h;
        let values = (0..TABLE_NODES + 2)
            .into_par_iter()
            .map(|i| lsd_radial_cdf(law, (u0 + h * i as f64).exp()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { u0, h, values })
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        let s = ((x.ln() - self.u0) / self.h).clamp(1.0, (last - 1) as f64);
        let i = (s.floor() as usize).min(last - 2);
        let t = s - i as f64;
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let v = p1
            + 0.5
                * t
                * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
        v.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AngularStat {
    /// Distance of each argument to the grid `{pi j / g}` and counts per
    /// grid direction `j = 0..2g` (direction `j` at angle `pi j / g`).
    Grid {
        max_grid_deviation: f64,
        per_direction_counts: Vec<usize>,
    },
    /// KS distance of `arg(z) / 2 pi mod 1` to the uniform law.
    Uniform { uniform_ks: f64 },
}

/// Angular comparison on the nonzero points of `sample`.
pub fn angular_test(sample: &EsdSample, law: &LsdLaw) -> Result<AngularStat> {
    law.validate()?;
    let angles: Vec<f64> = sample
        .points
        .iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| z.arg())
        .collect();
    if angles.is_empty() {
        return Err(Error::EmptySample);
    }
    match *law {
        LsdLaw::RootsOfUnityProduct { g } => {
            let step = PI / g as f64;
            let directions = 2 * g as usize;
            let mut counts = vec![0usize; directions];
            let mut worst: f64 = 0.0;
            for theta in angles {
                let j = (theta / step).round();
                worst = worst.max((theta - j * step).abs());
                counts[(j as i64).rem_euclid(directions as i64) as usize] += 1;
            }
            Ok(AngularStat::Grid {
                max_grid_deviation: worst,
                per_direction_counts: counts,
            })
        }
        LsdLaw::UniformCircleProduct { .. } | LsdLaw::DegenerateCircle { .. } => {
            let u: Vec<f64> = angles.iter().map(|t| (t / TAU).rem_euclid(1.0)).collect();
            let uniform_ks = ks_statistic(&u, |x| Ok(x.clamp(0.0, 1.0)))?;
            Ok(AngularStat::Uniform { uniform_ks })
        }
    }
}

/// Fraction of the sample's nonstructural points in `r - eps < |z| < r + eps`.
pub fn band_mass(sample: &EsdSample, r: f64, epsilon: f64) -> f64 {
    if sample.points.is_empty() || epsilon <= 0.0 {
        return 0.0;
    }
    let inside = sample
        .points
        .iter()
        .filter(|z| {
            let m = z.norm();
            m > r - epsilon && m < r + epsilon
        })
        .count();
    inside as f64 / sample.points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radial_table_tracks_exact_cdf() {
        let law = LsdLaw::UniformCircleProduct { g: 3 };
        let radii: Vec<f64> = (0..200).map(|i| 0.05 + 0.01 * i as f64).collect();
        let table = RadialTable::new(&law, &radii).unwrap();
        for i in 0..40 {
            let x = 0.05 + 0.0497 * i as f64;
            let exact = lsd_radial_cdf(&law, x).unwrap();
            assert!((table.cdf(x) - exact).abs() < 1e-8, "x = {x}");
        }
        assert_eq!(table.cdf(0.0), 0.0);
    }

    #[test]
    fn degenerate_radius_value() {
        assert!((degenerate_radius() - 0.749_306_001_288_449).abs() < 1e-14);
    }

    #[test]
    fn radial_tail_examples() {
        assert!((radial_tail(1, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(radial_tail(2, 0.0).unwrap(), 1.0);
        assert!((radial_tail(2, 1.0).unwrap() - 0.279_731_763_633_044_85).abs() < 1e-10);
        assert!(radial_tail(2, -1.0).is_err());
    }

    #[test]
    fn radial_cdf_examples() {
        let law1 = LsdLaw::UniformCircleProduct { g: 1 };
        for x in [0.1f64, 0.5, 1.0, 2.0] {
            let expected = 1.0 - (-x * x).exp();
            assert!((lsd_radial_cdf(&law1, x).unwrap() - expected).abs() < 1e-14);
        }
        let law2 = LsdLaw::RootsOfUnityProduct { g: 2 };
        assert!((lsd_radial_cdf(&law2, 1.0).unwrap() - 0.720_268_236_366_955).abs() < 1e-9);
        assert!((lsd_radial_cdf(&law2, 20.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lsd_radial_cdf(&law2, 0.0).unwrap(), 0.0);
        assert!(lsd_radial_cdf(&LsdLaw::degenerate(), 1.0).is_err());
    }

    #[test]
    fn sample_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = lsd_sample(&LsdLaw::RootsOfUnityProduct { g: 1 }, 500, &mut rng).unwrap();
        assert!(pts.iter().all(|z| z.im.abs() < 1e-12));
        assert!(pts.iter().any(|z| z.re < 0.0) && pts.iter().any(|z| z.re > 0.0));

        let circle = LsdLaw::DegenerateCircle { radius: 0.7 };
        let pts = lsd_sample(&circle, 200, &mut rng).unwrap();
        assert!(pts.iter().all(|z| (z.norm() - 0.7).abs() < 1e-14));
        let sample = EsdSample::from_points(pts);
        assert_eq!(band_mass(&sample, 0.7, 1e-6), 1.0);
        assert_eq!(band_mass(&sample, 0.7, 0.0), 0.0);
    }

    #[test]
    fn uniform_circle_g1_radius_squared_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = lsd_sample(&LsdLaw::UniformCircleProduct { g: 1 }, 20_000, &mut rng).unwrap();
        let sq: Vec<f64> = pts.iter().map(|z| z.norm_sqr()).collect();
        let d = ks_statistic(&sq, |x| Ok(1.0 - (-x).exp())).unwrap();
        assert!(d < 0.02, "{d}");
    }

    #[test]
    fn ks_on_own_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let law = LsdLaw::RootsOfUnityProduct { g: 2 };
        let sample = EsdSample::from_points(lsd_sample(&law, 10_000, &mut rng).unwrap());
        let d = ks_radial(&sample, &law).unwrap();
        assert!(d < 0.02, "{d}");

        let law = LsdLaw::UniformCircleProduct { g: 2 };
        let sample = EsdSample::from_points(lsd_sample(&law, 10_000, &mut rng).unwrap());
        match angular_test(&sample, &law).unwrap() {
            AngularStat::Uniform { uniform_ks } => assert!(uniform_ks < 0.02),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ks_degenerate_mismatch() {
        let sample = EsdSample::from_points(vec![Complex64::new(0.0, 0.0); 10]);
        let d = ks_radial(&sample, &LsdLaw::UniformCircleProduct { g: 1 }).unwrap();
        assert_eq!(d, 1.0);
        assert!(matches!(
            ks_radial(&EsdSample::from_points(vec![]), &LsdLaw::UniformCircleProduct { g: 1 }),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn angular_all_at_zero() {
        let sample = EsdSample::from_points(vec![Complex64::new(1.0, 0.0); 50]);
        match angular_test(&sample, &LsdLaw::UniformCircleProduct { g: 2 }).unwrap() {
            AngularStat::Uniform { uniform_ks } => assert!(uniform_ks > 0.97),
            other => panic!("unexpected {other:?}"),
        }
        match angular_test(&sample, &LsdLaw::RootsOfUnityProduct { g: 2 }).unwrap() {
            AngularStat::Grid {
                max_grid_deviation,
                per_direction_counts,
            } => {
                assert_eq!(max_grid_deviation, 0.0);
                assert_eq!(per_direction_counts, vec![50, 0, 0, 0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_sample_ks() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
    }
}
