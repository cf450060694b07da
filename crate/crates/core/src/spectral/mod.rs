//! Exact eigenvalues of the k-circulant `A_{k,n}`.
//!
//! The characteristic polynomial factors as
//! `lambda^{n-n'} * prod_j (lambda^{n_j} - Pi_j)`, where `Pi_j` multiplies the
//! DFT values `lambda_{t n / n'}` over block `P_j` of the eigenvalue
//! partition. Block products are carried in log-polar form because orbits of
//! a few thousand elements overflow a plain `f64` product.

pub mod dense;
pub mod dft;
pub mod matching;

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{decompose, eigen_partition, Conjugacy, EigenPartition, KCirculantParams};

pub use dense::{dense_spectrum_oracle, det_probe_oracle, qr_eigenvalues, DetProbe, LogDet};
pub use dft::{dft, dft_fast, dft_naive, DftPlan};
pub use matching::{spectra_match, MatchOutcome};

/// The input sequence `a_0, ..., a_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSequence(Vec<f64>);

impl InputSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionTooSmall(values.len() as u64));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        Ok(Self(values))
    }

    /// The unit impulse `e_0` of length `n`.
    pub fn delta(n: usize) -> Result<Self> {
        let mut v = vec![0.0; n];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl AsRef<[f64]> for InputSequence {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Dense `A_{k,n}`: row `j`, column `c` holds `a_{(c - j k) mod n}`.
pub fn build_matrix(a: &InputSequence, k: u64, n: usize) -> Result<DMatrix<f64>> {
    if a.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: a.len(),
        });
    }
    let k = (k % n as u64) as usize;
    let v = a.values();
    Ok(DMatrix::from_fn(n, n, |j, c| {
        let shift = (j * k) % n;
        v[(c + n - shift) % n]
    }))
}

/// `trace(A_{k,n}) = sum_j a_{j (1 - k) mod n}`.
pub fn trace(a: &InputSequence, k: u64) -> f64 {
    let n = a.len() as u64;
    let step = (1 + n - k % n) % n;
    (0..n).map(|j| a.values()[((j * step) % n) as usize]).sum()
}

/// `Pi_j` as `exp(ln_abs) * exp(i arg)` with `arg` in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockProduct {
    pub ln_abs: f64,
    pub arg: f64,
}

impl BlockProduct {
    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.ln_abs.exp(), self.arg)
    }

    /// `|Pi_j|^{1/m}`.
    pub fn root_modulus(&self, m: u64) -> f64 {
        (self.ln_abs / m as f64).exp()
    }
}

fn principal(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `Pi_j = prod_{t in P_j} lambda_{t n / n'}`. Self-conjugate blocks are
/// multiplied as `|lambda|^2` pairs times the real factors at `t = 0` and
/// `t = n'/2`, so their products are exactly real.
pub fn block_products(
    dft: &[Complex64],
    partition: &EigenPartition,
    params: &KCirculantParams,
) -> Vec<BlockProduct> {
    let n_prime = params.n_prime;
    let stride = params.stride();
    partition
        .blocks
        .iter()
        .zip(&partition.conjugacy)
        .map(|(block, conj)| {
            let mut ln_abs = 0.0;
            let mut arg = 0.0;
            match conj {
                Conjugacy::SelfConjugate => {
                    let mut negative = false;
                    for &t in block {
                        let lam = dft[(t * stride) as usize];
                        if t == 0 || 2 * t == n_prime {
                            ln_abs += lam.re.abs().ln();
                            negative ^= lam.re < 0.0;
                        } else if t < n_prime - t {
                            ln_abs += lam.norm_sqr().ln();
                        }
                    }
                    if negative {
                        arg = PI;
                    }
                }
                Conjugacy::PairedWith(_) => {
                    for &t in block {
                        let lam = dft[(t * stride) as usize];
                        ln_abs += lam.norm().ln();
                        arg += lam.arg();
                    }
                    arg = principal(arg);
                }
            }
            BlockProduct { ln_abs, arg }
        })
        .collect()
}

/// Where an eigenvalue in a [`SpectrumResult`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenOrigin {
    /// Partition block, or `None` for a structural zero.
    pub block: Option<usize>,
    pub root: usize,
}

impl EigenOrigin {
    /// Block index with `-1` marking structural zeros.
    pub fn block_label(&self) -> i64 {
        self.block.map_or(-1, |b| b as i64)
    }
}

/// The eigenvalue multiset of `A_{k,n}`, structural zeros first, then each
/// block's roots in order of `r`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    pub origins: Vec<EigenOrigin>,
    pub zero_multiplicity: usize,
    pub block_products: Vec<BlockProduct>,
    pub block_sizes: Vec<u64>,
    pub dft: Vec<Complex64>,
}

impl SpectrumResult {
    /// Nonzero eigenvalues contributed by block `j`.
    pub fn block_eigenvalues(&self, j: usize) -> impl Iterator<Item = &Complex64> {
        self.eigenvalues
            .iter()
            .zip(&self.origins)
            .filter(move |(_, o)| o.block == Some(j))
            .map(|(v, _)| v)
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
}

/// Emits the `m` complex `m`-th roots of `pi`, principal argument first.
pub fn block_roots(pi: &BlockProduct, m: u64) -> impl Iterator<Item = Complex64> + '_ {
    let modulus = pi.root_modulus(m);
    (0..m).map(move |r| {
        let theta = (pi.arg + TAU * r as f64) / m as f64;
        Complex64::from_polar(modulus, theta)
    })
}

/// A k-circulant shape `(k, n)` with its partition and transform precomputed,
/// for repeated spectra over fresh inputs.
#[derive(Debug, Clone)]
pub struct KCirculant {
    params: KCirculantParams,
    partition: EigenPartition,
    plan: DftPlan,
}

impl KCirculant {
    pub fn new(k: u64, n: u64) -> Result<Self> {
        let params = decompose(n, k)?;
        let partition = eigen_partition(&params);
        let plan = DftPlan::new(n as usize);
        Ok(Self {
            params,
            partition,
            plan,
        })
    }

    pub fn params(&self) -> &KCirculantParams {
        &self.params
    }

    pub fn partition(&self) -> &EigenPartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.params.n as usize
    }

    fn check(&self, a: &InputSequence) -> Result<()> {
        if a.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: a.len(),
            });
        }
        Ok(())
    }

    pub fn dft(&self, a: &InputSequence) -> Result<Vec<Complex64>> {
        self.check(a)?;
        Ok(self.plan.transform(a.values()))
    }

    pub fn block_products(&self, a: &InputSequence) -> Result<Vec<BlockProduct>> {
        let lam = self.dft(a)?;
        Ok(block_products(&lam, &self.partition, &self.params))
    }

    /// Spectral radius of `A_{k,n}` from the block products alone:
    /// `max_j |Pi_j|^{1/n_j}`.
    pub fn spectral_radius(&self, a: &InputSequence) -> Result<f64> {
        let products = self.block_products(a)?;
        Ok(products
            .iter()
            .zip(&self.partition.sizes)
            .map(|(p, &m)| p.root_modulus(m))
            .fold(0.0, f64::max))
    }

    pub fn spectrum(&self, a: &InputSequence) -> Result<SpectrumResult> {
        let lam = self.dft(a)?;
        let products = block_products(&lam, &self.partition, &self.params);
        let n = self.n();
        let zeros = self.params.zero_multiplicity() as usize;
        let mut eigenvalues = Vec::with_capacity(n);
        let mut origins = Vec::with_capacity(n);
        for r in 0..zeros {
            eigenvalues.push(Complex64::new(0.0, 0.0));
            origins.push(EigenOrigin { block: None, root: r });
        }
        for (j, (pi, &m)) in products.iter().zip(&self.partition.sizes).enumerate() {
            for (r, z) in block_roots(pi, m).enumerate() {
                eigenvalues.push(z);
                origins.push(EigenOrigin {
                    block: Some(j),
                    root: r,
                });
            }
        }
        Ok(SpectrumResult {
            n,
            eigenvalues,
            origins,
            zero_multiplicity: zeros,
            block_products: products,
            block_sizes: self.partition.sizes.clone(),
            dft: lam,
        })
    }
}

/// Eigenvalues of `A_{k,n}` from the factored characteristic polynomial.
pub fn formula_spectrum(a: &InputSequence, k: u64, n: u64) -> Result<SpectrumResult> {
    KCirculant::new(k, n)?.spectrum(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> InputSequence {
        InputSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn build_matrix_circulant() {
        let m = build_matrix(&seq(&[1.0, 2.0, 3.0]), 1, 3).unwrap();
        let rows: Vec<Vec<f64>> = (0..3).map(|i| m.row(i).iter().copied().collect()).collect();
        assert_eq!(rows, vec![vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0], vec![2.0, 3.0, 1.0]]);
    }

    #[test]
    fn build_matrix_k2_n4() {
        let m = build_matrix(&seq(&[0.0, 1.0, 2.0, 3.0]), 2, 4).unwrap();
        let rows: Vec<Vec<f64>> = (0..4).map(|i| m.row(i).iter().copied().collect()).collect();
        assert_eq!(rows[0], vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(rows[1], vec![2.0, 3.0, 0.0, 1.0]);
        assert_eq!(rows[2], rows[0]);
        assert_eq!(rows[3], rows[1]);
    }

    #[test]
    fn build_matrix_delta_is_permutation() {
        let n = 7;
        let m = build_matrix(&InputSequence::delta(n).unwrap(), 3, n).unwrap();
        for j in 0..n {
            for c in 0..n {
                let expected = if c == (3 * j) % n { 1.0 } else { 0.0 };
                assert_eq!(m[(j, c)], expected);
            }
        }
    }

    #[test]
    fn build_matrix_length_mismatch() {
        assert!(matches!(
            build_matrix(&seq(&[1.0, 2.0]), 1, 3),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn input_validation() {
        assert!(InputSequence::new(vec![1.0]).is_err());
        assert!(matches!(
            InputSequence::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteInput(1))
        ));
    }

    #[test]
    fn k1_spectrum_is_the_dft() {
        let a = seq(&[0.3, -1.2, 0.8, 2.0, -0.4]);
        let s = formula_spectrum(&a, 1, 5).unwrap();
        let lam = dft(a.values());
        for (t, l) in lam.iter().enumerate() {
            assert!((s.eigenvalues[t] - l).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_spectrum_is_roots_of_unity() {
        let s = formula_spectrum(&InputSequence::delta(7).unwrap(), 2, 7).unwrap();
        for p in &s.block_products {
            assert!((p.to_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        for (z, o) in s.eigenvalues.iter().zip(&s.origins) {
            let m = s.block_sizes[o.block.unwrap()] as i32;
            assert!((z.powi(m) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_multiplicity_k2_n6() {
        let a = seq(&[0.5, 1.0, -0.2, 0.7, 0.1, -1.5]);
        let s = formula_spectrum(&a, 2, 6).unwrap();
        assert_eq!(s.zero_multiplicity, 3);
        assert_eq!(s.eigenvalues.len(), 6);
        assert_eq!(s.eigenvalues.iter().filter(|z| **z == Complex64::new(0.0, 0.0)).count(), 3);
    }

    #[test]
    fn block_product_examples() {
        let a = seq(&[0.9, -0.3, 1.1, 0.4, -0.7, 0.2, 0.5, -1.0, 0.6, 0.05]);
        let s = formula_spectrum(&a, 3, 10).unwrap();
        let total: f64 = a.values().iter().sum();
        assert!((s.block_products[0].to_complex().re - total).abs() < 1e-12);
        // Block {5}: lambda_5 = sum (-1)^l a_l.
        let alt: f64 = a.values().iter().enumerate().map(|(l, v)| if l % 2 == 0 { *v } else { -*v }).sum();
        let pi5 = s.block_products[3].to_complex();
        assert!((pi5.re - alt).abs() < 1e-12);
        assert_eq!(pi5.im.abs() < 1e-12, true);
    }

    #[test]
    fn trace_matches_sum() {
        let a = seq(&[0.9, -0.3, 1.1, 0.4, -0.7, 0.2, 0.5, -1.0, 0.6]);
        for k in 1..9 {
            let s = formula_spectrum(&a, k, 9).unwrap();
            let m = build_matrix(&a, k, 9).unwrap();
            assert!((trace(&a, k) - m.trace()).abs() < 1e-12);
            assert!((s.sum().re - trace(&a, k)).abs() < 1e-9 * 9.0 * a.max_abs());
            assert!(s.sum().im.abs() < 1e-9 * 9.0 * a.max_abs());
        }
    }

    #[test]
    fn large_block_products_do_not_overflow() {
        // 2 generates the units mod 3^8, so one block has 4374 members.
        let n = 6561usize;
        let a = InputSequence::new((0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect()).unwrap();
        let s = formula_spectrum(&a, 2, n as u64).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}
