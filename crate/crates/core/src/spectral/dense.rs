//! Brute-force ground truth for small `n`: dense eigenvalues and determinant
//! probes of `lambda I - A`, computed without any number theory.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{build_matrix, formula_spectrum, InputSequence};
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense eigenvalue oracle.
pub const DENSE_EIGEN_MAX: usize = 128;
/// Largest dimension accepted by the determinant probe.
pub const DET_PROBE_MAX: usize = 512;

const MAX_QR_ITERATIONS: usize = 120;

/// Parlett-Reinsch balancing by powers of two; leaves eigenvalues unchanged.
fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR with
/// exceptional shifts every ten stalled iterations.
fn hessenberg_qr(h: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // `nn` is the active trailing index; `t` accumulates exceptional shifts.
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Find a negligible subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() + s == s {
                    h[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = h[(nu - 1, nu - 1)];
            let mut w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(Error::NoConvergence {
                    index: nu,
                    iterations: its,
                });
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                let s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }
            // Double-shift QR sweep on rows/columns l..=nu.
            let mut k = m;
            while k < nu {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k != nu - 1 { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            h[(k, k - 1)] = -h[(k, k - 1)];
                        }
                    } else {
                        h[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if k != nu - 1 {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k + 1, j)] -= pp * y;
                        h[(k, j)] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if k != nu - 1 {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k + 1)] -= pp * q;
                        h[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Eigenvalues of a general real matrix: balancing, Householder reduction to
/// Hessenberg form, shifted QR.
pub fn qr_eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    assert!(matrix.is_square(), "qr_eigenvalues needs a square matrix");
    let mut a = matrix.clone();
    balance(&mut a);
    let mut h = a.hessenberg().h();
    hessenberg_qr(&mut h)
}

/// Eigenvalues of a dense real matrix, robust to a defective zero eigenvalue.
///
/// Singular k-circulants carry long Jordan chains at zero, where plain QR is
/// only accurate to `eps^{1/m}`. The oracle first iterates
/// `V <- range(A V)` (numerical rank via SVD) until the dimension stalls;
/// the limit is an invariant subspace on which `A` is invertible, so its
/// compression holds every nonzero eigenvalue and the rank deficit counts
/// the zeros.
pub fn dense_spectrum_oracle(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    if n > DENSE_EIGEN_MAX {
        return Err(Error::ResourceCap(format!(
            "dense eigen oracle limited to n <= {DENSE_EIGEN_MAX}, got {n}"
        )));
    }
    let scale = matrix.norm();
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let tol = 1e-10 * scale;
    let mut basis: Option<DMatrix<f64>> = None;
    let mut rank = n;
    loop {
        let image = match &basis {
            Some(v) => matrix * v,
            None => matrix.clone(),
        };
        let range = range_basis(image, tol);
        if range.ncols() == rank {
            break;
        }
        rank = range.ncols();
        if rank == 0 {
            break;
        }
        basis = Some(range);
    }
    let mut eigs = vec![Complex64::new(0.0, 0.0); n - rank];
    if rank > 0 {
        let core = match &basis {
            Some(v) => v.transpose() * matrix * v,
            None => matrix.clone(),
        };
        eigs.extend(qr_eigenvalues(&core)?);
    }
    Ok(eigs)
}

/// Orthonormal basis of the column space of `m`, keeping directions with
/// singular value above `tol`.
///
/// One-sided Jacobi: columns are rotated pairwise until mutually orthogonal,
/// after which their norms are the singular values. This stays accurate when
/// `m` is exactly rank deficient.
fn range_basis(mut m: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = m.column(p).norm_squared();
                let beta = m.column(q).norm_squared();
                let gamma = m.column(p).dot(&m.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m.nrows() {
                    let (x, y) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = c * x - s * y;
                    m[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let keep: Vec<usize> = (0..cols).filter(|&j| m.column(j).norm() > tol).collect();
    let mut basis = m.select_columns(keep.iter());
    for mut col in basis.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    basis
}

const JACOBI_SWEEPS: usize = 60;

/// A complex determinant in log-polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDet {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogDet {
    /// `|self / other - 1|`.
    pub fn relative_difference(&self, other: &LogDet) -> f64 {
        if self.ln_abs == f64::NEG_INFINITY && other.ln_abs == f64::NEG_INFINITY {
            return 0.0;
        }
        let ratio = Complex64::from_polar((self.ln_abs - other.ln_abs).exp(), self.arg - other.arg);
        (ratio - 1.0).norm()
    }
}

/// `det(M)` for a complex matrix by LU with partial pivoting.
pub fn complex_log_det(mut m: DMatrix<Complex64>) -> Option<LogDet> {
    let n = m.nrows();
    let mut ln_abs = 0.0;
    let mut arg = 0.0;
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let tiny = scale * f64::EPSILON * n as f64 * 1e-3;
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= tiny {
            return None;
        }
        if piv != col {
            m.swap_rows(piv, col);
            arg += PI;
        }
        let d = m[(col, col)];
        ln_abs += d.norm().ln();
        arg += d.arg();
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in (col + 1)..n {
                let v = m[(col, c)];
                m[(r, c)] -= f * v;
            }
        }
    }
    Some(LogDet {
        ln_abs,
        arg: arg.rem_euclid(TAU),
    })
}

/// One probe point with `det(lambda I - A)` from dense LU and from the
/// factored characteristic polynomial.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetProbe {
    pub point: Complex64,
    pub dense: LogDet,
    pub formula: LogDet,
    pub relative_error: f64,
}

/// `ln(z^m - pi)` without forming `z^m`, which overflows for large blocks.
fn ln_power_minus(z: Complex64, m: u64, pi_ln_abs: f64, pi_arg: f64) -> (f64, f64) {
    let lp = m as f64 * z.norm().ln();
    let ap = m as f64 * z.arg();
    let top = lp.max(pi_ln_abs);
    let v = Complex64::from_polar((lp - top).exp(), ap) - Complex64::from_polar((pi_ln_abs - top).exp(), pi_arg);
    (v.norm().ln() + top, v.arg())
}

/// Compares `det(lambda I - A)` from LU with
/// `lambda^{n-n'} prod_j (lambda^{n_j} - Pi_j)` at each probe point.
/// A probe that lands numerically on an eigenvalue yields
/// [`Error::SingularProbe`]; callers resample it.
pub fn det_probe_oracle(
    a: &InputSequence,
    k: u64,
    n: usize,
    points: &[Complex64],
) -> Result<Vec<DetProbe>> {
    if n > DET_PROBE_MAX {
        return Err(Error::ResourceCap(format!(
            "determinant probe limited to n <= {DET_PROBE_MAX}, got {n}"
        )));
    }
    let matrix = build_matrix(a, k, n)?;
    let spectrum = formula_spectrum(a, k, n as u64)?;
    let zeros = spectrum.zero_multiplicity as f64;
    points
        .iter()
        .map(|&z| {
            let shifted = DMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
                d - matrix[(i, j)]
            });
            let dense = complex_log_det(shifted).ok_or(Error::SingularProbe(z))?;
            let mut ln_abs = zeros * z.norm().ln();
            let mut arg = zeros * z.arg();
            for (p, &m) in spectrum.block_products.iter().zip(&spectrum.block_sizes) {
                let (l, t) = ln_power_minus(z, m, p.ln_abs, p.arg);
                ln_abs += l;
                arg += t;
            }
            let formula = LogDet {
                ln_abs,
                arg: arg.rem_euclid(TAU),
            };
            Ok(DetProbe {
                point: z,
                dense,
                formula,
                relative_error: dense.relative_difference(&formula),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::matching::spectra_match;

    fn roots_of_unity(m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / m as f64))
            .collect()
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = dense_spectrum_oracle(&DMatrix::identity(6, 6)).unwrap();
        assert!(eig.iter().all(|z| (z - 1.0).norm() < 1e-14));
    }

    #[test]
    fn zero_matrix_is_all_zeros() {
        let eig = dense_spectrum_oracle(&DMatrix::zeros(5, 5)).unwrap();
        assert_eq!(eig, vec![Complex64::new(0.0, 0.0); 5]);
    }

    #[test]
    fn permutation_cycles() {
        let a = InputSequence::delta(7).unwrap();
        let m = build_matrix(&a, 2, 7).unwrap();
        let eig = qr_eigenvalues(&m).unwrap();
        let mut expected = vec![Complex64::new(1.0, 0.0)];
        expected.extend(roots_of_unity(3));
        expected.extend(roots_of_unity(3));
        let out = spectra_match(&eig, &expected, 1e-10).unwrap();
        assert!(out.matched, "distance {}", out.max_pair_distance);
    }

    #[test]
    fn two_by_two_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let eig = qr_eigenvalues(&m).unwrap();
        let out = spectra_match(&eig, &[Complex64::i(), -Complex64::i()], 1e-14).unwrap();
        assert!(out.matched);
    }

    #[test]
    fn nilpotent_shift_deflates_exactly() {
        // Single Jordan block of size 6: plain QR returns eps^{1/6} noise.
        let mut m = DMatrix::zeros(6, 6);
        for i in 0..5 {
            m[(i, i + 1)] = 1.0;
        }
        let eig = dense_spectrum_oracle(&m).unwrap();
        assert!(eig.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn log_det_small() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(4.0, 0.0),
            ],
        );
        let d = complex_log_det(m).unwrap();
        let v = Complex64::from_polar(d.ln_abs.exp(), d.arg);
        assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-13);
        assert!(complex_log_det(DMatrix::zeros(3, 3)).is_none());
    }

    #[test]
    fn det_probe_zero_input() {
        let a = InputSequence::new(vec![0.0; 6]).unwrap();
        let probes = det_probe_oracle(&a, 2, 6, &[Complex64::new(0.7, -0.3)]);
        // A = 0 makes lambda I - A diagonal; the formula is lambda^n.
        let p = probes.unwrap()[0];
        assert!(p.relative_error < 1e-12);
    }

    #[test]
    fn det_probe_circulant() {
        let a = InputSequence::new(vec![0.4, -1.3, 0.25, 0.9]).unwrap();
        let p = det_probe_oracle(&a, 1, 4, &[Complex64::new(2.0, 1.0)]).unwrap();
        assert!(p[0].relative_error < 1e-9);
    }

    #[test]
    fn resource_caps() {
        let m = DMatrix::<f64>::zeros(129, 129);
        assert!(matches!(dense_spectrum_oracle(&m), Err(Error::ResourceCap(_))));
    }
}
