//! `lambda_t = sum_l a_l w^{t l}` with `w = exp(2 pi i / n)`.
//!
//! Short inputs use the direct sum over a twiddle table. Longer ones go
//! through `rustfft`, which handles arbitrary `n` (Bluestein/Rader for awkward
//! prime factors). The positive exponent makes this the unnormalized inverse
//! transform in FFT-library terms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Largest length handled by the direct O(n^2) sum. The FFT is already
/// faster from n = 32 on, twenty times so at n = 128.
pub const NAIVE_MAX: usize = 16;

/// `w^m` for `m = 0..n`.
pub fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let (s, c) = (2.0 * PI * m as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// Direct evaluation of every `lambda_t`.
pub fn dft_naive(a: &[f64]) -> Vec<Complex64> {
    let n = a.len();
    let w = twiddles(n);
    (0..n).map(|t| naive_coefficient(a, &w, t)).collect()
}

/// Direct evaluation of a single `lambda_t` against a precomputed table.
pub fn naive_coefficient(a: &[f64], w: &[Complex64], t: usize) -> Complex64 {
    let n = a.len();
    let mut idx = 0usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for &x in a {
        acc += w[idx] * x;
        idx += t;
        if idx >= n {
            idx %= n;
        }
    }
    acc
}

/// FFT evaluation of every `lambda_t`.
pub fn dft_fast(a: &[f64]) -> Vec<Complex64> {
    DftPlan::with_fft(a.len()).transform(a)
}

/// Evaluates `lambda_t` with the backend chosen by length.
pub fn dft(a: &[f64]) -> Vec<Complex64> {
    DftPlan::new(a.len()).transform(a)
}

/// A reusable transform of fixed length.
#[derive(Clone)]
pub struct DftPlan {
    n: usize,
    backend: Backend,
}

#[derive(Clone)]
enum Backend {
    Naive(Vec<Complex64>),
    Fft(Arc<dyn Fft<f64>>),
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let backend = match self.backend {
            Backend::Naive(_) => "naive",
            Backend::Fft(_) => "fft",
        };
        f.debug_struct("DftPlan")
            .field("n", &self.n)
            .field("backend", &backend)
            .finish()
    }
}

impl DftPlan {
    pub fn new(n: usize) -> Self {
        if n <= NAIVE_MAX {
            Self {
                n,
                backend: Backend::Naive(twiddles(n)),
            }
        } else {
            Self::with_fft(n)
        }
    }

    pub fn with_fft(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Self {
            n,
            backend: Backend::Fft(fft),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn transform(&self, a: &[f64]) -> Vec<Complex64> {
        assert_eq!(a.len(), self.n, "DftPlan length mismatch");
        match &self.backend {
            Backend::Naive(w) => (0..self.n).map(|t| naive_coefficient(a, w, t)).collect(),
            Backend::Fft(fft) => {
                let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft.process(&mut buf);
                buf
            }
        }
    }
}
