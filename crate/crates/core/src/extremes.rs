//! Spectral radius and its Gumbel limit for `n = k^2 + 1`.
//!
//! There the nonzero eigenvalues of `n^{-1/2} A_{k,n}` come in blocks of four
//! with modulus `(E_1 E_2)^{1/4}`, so the spectral radius behaves like the
//! maximum of `q = floor(n/4)` i.i.d. copies of `(E_1 E_2)^{1/4}`. The tail
//! `P(E_1 E_2 > x)` drives the normalizing constants.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::seeds::trial_rng;
use crate::spectral::SpectrumResult;

/// `Lambda_theta(x) = exp(-theta e^{-x})`.
pub fn gumbel_cdf(x: f64, theta: f64) -> f64 {
    (-theta * (-x).exp()).exp()
}

/// Centering and scaling for the maximum of `q` copies of `(E_1 E_2)^{1/4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelNormalization {
    pub q: u64,
    pub c_q: f64,
    pub d_q: f64,
}

/// `c_q = (8 ln q)^{-1/2}` and
/// `d_q = sqrt(ln q / 2) (1 + ln ln q / (4 ln q)) + ln(pi/2) / (2 sqrt(8 ln q))`.
pub fn normalization(q: u64) -> Result<GumbelNormalization> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalization needs q >= 2, got {q}"
        )));
    }
    let lq = (q as f64).ln();
    let root8 = (8.0 * lq).sqrt();
    let c_q = 1.0 / root8;
    let d_q = (lq.sqrt() / 2f64.sqrt()) * (1.0 + lq.ln() / (4.0 * lq)) + (PI / 2.0).ln() / (2.0 * root8);
    Ok(GumbelNormalization { q, c_q, d_q })
}

/// `q = floor(n / 4)`, the number of four-element blocks when `n = k^2 + 1`.
pub fn block_count(n: u64) -> u64 {
    n / 4
}

pub fn standardize_radius(sp: f64, norm: &GumbelNormalization) -> f64 {
    (sp - norm.d_q) / norm.c_q
}

/// `P(E_1 E_2 > x) = int_0^inf exp(-y - x/y) dy`.
///
/// With `y = sqrt(x) e^u` the integrand becomes `exp(-2 sqrt(x) cosh u)`,
/// symmetric in `u`, so the tail is `z int_0^U cosh(u) e^{-z cosh u} du` with
/// `z = 2 sqrt(x)` and `U` where the exponent passes double underflow.
pub fn kbar(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("kbar needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let z = 2.0 * x.sqrt();
    let upper = (800.0 / z).max(1.0).acosh().max(20.0 / z.sqrt());
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        initial_panels: 16,
        max_panels: 2000,
    };
    let r = integrate(|u: f64| u.cosh() * (-z * u.cosh()).exp(), 0.0, upper, opts)?;
    Ok((z * r.value).min(1.0))
}

/// Large-`x` equivalent `sqrt(pi) x^{1/4} e^{-2 sqrt(x)}` of [`kbar`].
pub fn kbar_asymptotic(x: f64) -> f64 {
    PI.sqrt() * x.powf(0.25) * (-2.0 * x.sqrt()).exp()
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(spectrum: &SpectrumResult) -> f64 {
    spectrum.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Source of unit exponential variates, so the reference maxima can run on a
/// deterministic stub as well as on a seeded generator.
pub trait ExponentialSource {
    fn next_exp(&mut self) -> f64;
}

impl<R: Rng> ExponentialSource for R {
    fn next_exp(&mut self) -> f64 {
        Exp1.sample(self)
    }
}

/// `max_{t <= q} (E_t E'_t)^{1/4}` for one trial.
pub fn iid_max<S: ExponentialSource + ?Sized>(q: u64, source: &mut S) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..q {
        let p = source.next_exp() * source.next_exp();
        if p > best {
            best = p;
        }
    }
    best.powf(0.25)
}

/// Standardized i.i.d. maxima, one per trial, each trial seeded from
/// `(master_seed, trial)`.
pub fn iid_max_reference(q: u64, trials: usize, master_seed: u64) -> Result<Vec<f64>> {
    let norm = normalization(q)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i as u64);
            standardize_radius(iid_max(q, &mut rng), &norm)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ones;
    impl ExponentialSource for Ones {
        fn next_exp(&mut self) -> f64 {
            1.0
        }
    }

    #[test]
    fn gumbel_values() {
        assert!((gumbel_cdf(0.0, 1.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(gumbel_cdf(800.0, 1.0), 1.0);
        let theta = PI.sqrt() * (-2.0f64).exp();
        for i in -40..=40 {
            let x = i as f64 * 0.25;
            let lhs = gumbel_cdf(x, theta);
            let rhs = gumbel_cdf(x - theta.ln(), 1.0);
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_values() {
        let n = normalization(16).unwrap();
        assert!((n.c_q - 0.212_330_450_072_004_76).abs() < 1e-12);
        assert!(n.d_q.is_finite());
        for q in [2u64, 10, 1000, 123_456] {
            let n = normalization(q).unwrap();
            assert!((n.c_q * (8.0 * (q as f64).ln()).sqrt() - 1.0).abs() < 1e-15);
        }
        // Reference values from 30-digit arithmetic.
        let n = normalization(625).unwrap();
        assert!((n.c_q - 0.139_343_879_323_735_89).abs() < 1e-12);
        assert!((n.d_q - 1.955_326_868_751_323).abs() < 1e-12);
        assert!(normalization(1).is_err());
    }

    #[test]
    fn kbar_examples() {
        assert_eq!(kbar(0.0).unwrap(), 1.0);
        assert!((kbar(1.0).unwrap() - 0.279_731_763_633_044_85).abs() < 1e-12);
        let ratio = kbar(100.0).unwrap() / kbar_asymptotic(100.0);
        assert!((0.97..=1.03).contains(&ratio));
        let ratio = kbar(400.0).unwrap() / kbar_asymptotic(400.0);
        assert!((0.99..=1.01).contains(&ratio));
        assert!(kbar(-1.0).is_err());
    }

    #[test]
    fn kbar_asymptotic_values() {
        assert!((kbar_asymptotic(1.0) - 0.239_875_543_936_122_9).abs() < 1e-12);
        let mut prev = kbar_asymptotic(1.0);
        for i in 2..200 {
            let v = kbar_asymptotic(i as f64);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn standardize_identities() {
        let n = normalization(1225).unwrap();
        assert!(standardize_radius(n.d_q, &n).abs() < 1e-15);
        assert!((standardize_radius(n.d_q + n.c_q, &n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stub_source_is_deterministic() {
        let q = 50;
        assert_eq!(iid_max(q, &mut Ones), 1.0);
        let n = normalization(q).unwrap();
        let v = standardize_radius(iid_max(q, &mut Ones), &n);
        assert!((v - (1.0 - n.d_q) / n.c_q).abs() < 1e-15);
    }

    #[test]
    fn single_trial_reference() {
        assert_eq!(iid_max_reference(100, 1, 5).unwrap().len(), 1);
    }
}
