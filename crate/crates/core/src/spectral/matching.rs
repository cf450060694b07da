//! Multiset comparison of spectra.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Above this size the exact bottleneck assignment is skipped.
const EXACT_ASSIGNMENT_MAX: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub max_pair_distance: f64,
    pub matched: bool,
}

fn lex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Pairs two equal-size multisets and reports the largest pair distance.
///
/// Both sides are sorted lexicographically by `(re, im)` and paired in order,
/// then adjacent swaps repair pairs split by near-ties in the real part. If
/// that greedy pairing misses `tol`, the exact bottleneck assignment decides.
pub fn spectra_match(s1: &[Complex64], s2: &[Complex64], tol: f64) -> Result<MatchOutcome> {
    if s1.len() != s2.len() {
        return Err(Error::CardinalityMismatch(s1.len(), s2.len()));
    }
    if s1.is_empty() {
        return Ok(MatchOutcome {
            max_pair_distance: 0.0,
            matched: true,
        });
    }
    let mut a = s1.to_vec();
    let mut b = s2.to_vec();
    a.sort_by(lex);
    b.sort_by(lex);
    repair_adjacent(&a, &mut b);
    let greedy = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if greedy <= tol || a.len() > EXACT_ASSIGNMENT_MAX {
        return Ok(MatchOutcome {
            max_pair_distance: greedy,
            matched: greedy <= tol,
        });
    }
    let best = bottleneck_assignment(&a, &b).min(greedy);
    Ok(MatchOutcome {
        max_pair_distance: best,
        matched: best <= tol,
    })
}

fn repair_adjacent(a: &[Complex64], b: &mut [Complex64]) {
    let n = a.len();
    for _ in 0..n {
        let mut changed = false;
        for i in 0..n.saturating_sub(1) {
            let keep = (a[i] - b[i]).norm().max((a[i + 1] - b[i + 1]).norm());
            let swap = (a[i] - b[i + 1]).norm().max((a[i + 1] - b[i]).norm());
            if swap < keep {
                b.swap(i, i + 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Smallest `d` such that a perfect matching exists using only pairs at
/// distance `<= d`: binary search over candidate distances with augmenting
/// paths for the feasibility check.
fn bottleneck_assignment(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let dist: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).norm()))
        .collect();
    let mut candidates = dist.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(n, &dist, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

fn perfect_matching(n: usize, dist: &[f64], threshold: f64) -> bool {
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, n, dist, threshold, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

fn augment(
    row: usize,
    n: usize,
    dist: &[f64],
    threshold: f64,
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for col in 0..n {
        if dist[row * n + col] <= threshold && !seen[col] {
            seen[col] = true;
            let free = match owner[col] {
                None => true,
                Some(other) => augment(other, n, dist, threshold, seen, owner),
            };
            if free {
                owner[col] = Some(row);
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_sets() {
        let s = vec![c(1.0, 2.0), c(-1.0, 0.0), c(1.0, -2.0)];
        let out = spectra_match(&s, &s, 0.0).unwrap();
        assert_eq!(out.max_pair_distance, 0.0);
        assert!(out.matched);
    }

    #[test]
    fn small_perturbation() {
        let s = vec![c(1.0, 2.0), c(-1.0, 0.0), c(1.0, -2.0), c(0.5, 0.5)];
        let mut t: Vec<Complex64> = s.iter().map(|z| z + c(1e-10, -1e-10)).collect();
        t.reverse();
        let out = spectra_match(&s, &t, 1e-8).unwrap();
        assert!(out.matched);
        assert!(out.max_pair_distance < 2e-10);
    }

    #[test]
    fn near_tie_in_real_part() {
        // Conjugate pair whose real parts straddle each other after noise.
        let s = vec![c(1.0 + 1e-13, 2.0), c(1.0 - 1e-13, -2.0)];
        let t = vec![c(1.0 - 1e-13, 2.0), c(1.0 + 1e-13, -2.0)];
        let out = spectra_match(&s, &t, 1e-10).unwrap();
        assert!(out.matched, "{}", out.max_pair_distance);
    }

    #[test]
    fn interleaved_needs_assignment() {
        let s = vec![c(0.0, 5.0), c(1e-9, -5.0), c(2e-9, 5.0)];
        let t = vec![c(2e-9, -5.0), c(0.0, 5.0), c(1e-9, 5.0)];
        let out = spectra_match(&s, &t, 1e-8).unwrap();
        assert!(out.matched, "{}", out.max_pair_distance);
    }

    #[test]
    fn genuine_mismatch() {
        let out = spectra_match(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(2.0, 0.0)], 1e-3).unwrap();
        assert!(!out.matched);
        assert!((out.max_pair_distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cardinality() {
        assert!(matches!(
            spectra_match(&[c(0.0, 0.0)], &[], 1.0),
            Err(Error::CardinalityMismatch(1, 0))
        ));
    }
}
