//! Integer machinery behind the k-circulant eigenvalue formula.
//!
//! Multiplication by `k` permutes the residues `Z_{n'}` (with `n'` the part of
//! `n` coprime to `k`). Its orbits, the *eigenvalue partition*, decide how the
//! DFT values of the input combine into eigenvalues, and the proportion of
//! residues whose orbit is shorter than the orbit of `1` decides whether a
//! clean limiting law exists.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing prime order.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

fn exponent_of(mut m: u64, p: u64) -> u32 {
    let mut e = 0;
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    e
}

/// A prime shared by `k` and `n`, with its exponent in each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonPrime {
    pub p: u64,
    pub alpha: u32,
    pub beta: u32,
}

/// The pair `(k, n)` with `n = n' * prod p^beta` and `k = k' * prod p^alpha`
/// split along the primes common to both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KCirculantParams {
    pub k: u64,
    pub n: u64,
    pub n_prime: u64,
    pub k_prime: u64,
    pub common_primes: Vec<CommonPrime>,
}

impl KCirculantParams {
    /// Number of structural zero eigenvalues, `n - n'`.
    pub fn zero_multiplicity(&self) -> u64 {
        self.n - self.n_prime
    }

    /// `n / n'`: the stride mapping `t` in `Z_{n'}` to the DFT index `t n / n'`.
    pub fn stride(&self) -> u64 {
        self.n / self.n_prime
    }

    pub fn is_coprime(&self) -> bool {
        self.common_primes.is_empty()
    }
}

/// Reduces `k` mod `n` and splits off the primes common to `k` and `n`.
pub fn decompose(n: u64, k: u64) -> Result<KCirculantParams> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let k = k % n;
    if k == 0 {
        return Err(Error::DegenerateK { k, n });
    }
    let shared = gcd(k, n);
    let mut n_prime = n;
    let mut k_prime = k;
    let mut common_primes = Vec::new();
    for (p, _) in factorize(shared) {
        let alpha = exponent_of(k, p);
        let beta = exponent_of(n, p);
        n_prime /= p.pow(beta);
        k_prime /= p.pow(alpha);
        common_primes.push(CommonPrime { p, alpha, beta });
    }
    Ok(KCirculantParams {
        k,
        n,
        n_prime,
        k_prime,
        common_primes,
    })
}

/// Orbit of `x` under multiplication by `k` in `Z_{n'}`, sorted, with its
/// order `g_x` (the orbit size).
pub fn orbit(x: u64, k: u64, n_prime: u64) -> (Vec<u64>, u64) {
    assert!(x < n_prime, "orbit: x = {x} not in Z_{n_prime}");
    let mut block = vec![x];
    let mut y = mul_mod(x, k, n_prime);
    while y != x {
        block.push(y);
        y = mul_mod(y, k, n_prime);
    }
    let order = block.len() as u64;
    block.sort_unstable();
    (block, order)
}

/// How a block relates to its reflection `t -> n' - t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conjugacy {
    SelfConjugate,
    PairedWith(usize),
}

/// The orbits `P_0 = {0}, P_1, ..., P_{l-1}` of multiplication by `k` on
/// `Z_{n'}`, ordered by smallest representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenPartition {
    pub n_prime: u64,
    pub k: u64,
    pub blocks: Vec<Vec<u64>>,
    pub sizes: Vec<u64>,
    pub g1: u64,
    pub conjugacy: Vec<Conjugacy>,
    #[serde(skip)]
    block_of: Vec<u32>,
}

impl EigenPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block containing `t`.
    pub fn block_of(&self, t: u64) -> usize {
        self.block_of[t as usize] as usize
    }

    /// Number of residues whose order is strictly below `g1`.
    pub fn lower_order_count(&self) -> u64 {
        self.sizes.iter().filter(|&&s| s < self.g1).sum()
    }

    /// Histogram of block sizes as `(size, count)` in increasing size.
    pub fn size_histogram(&self) -> Vec<(u64, usize)> {
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        let mut out: Vec<(u64, usize)> = Vec::new();
        for s in sizes {
            match out.last_mut() {
                Some((v, c)) if *v == s => *c += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    pub fn self_conjugate_count(&self) -> usize {
        self.conjugacy
            .iter()
            .filter(|c| matches!(c, Conjugacy::SelfConjugate))
            .count()
    }
}

/// Builds the eigenvalue partition of `Z_{n'}` with a visited map, O(n').
pub fn eigen_partition(params: &KCirculantParams) -> EigenPartition {
    let n_prime = params.n_prime;
    let k = params.k % n_prime;
    let len = n_prime as usize;
    const UNSET: u32 = u32::MAX;
    let mut block_of = vec![UNSET; len];
    let mut blocks: Vec<Vec<u64>> = Vec::new();
    for x in 0..n_prime {
        if block_of[x as usize] != UNSET {
            continue;
        }
        let idx = blocks.len() as u32;
        let mut block = Vec::new();
        let mut y = x;
        loop {
            block_of[y as usize] = idx;
            block.push(y);
            y = mul_mod(y, k, n_prime);
            if y == x {
                break;
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    let sizes: Vec<u64> = blocks.iter().map(|b| b.len() as u64).collect();
    let g1 = if n_prime == 1 {
        1
    } else {
        sizes[block_of[1] as usize]
    };
    let conjugacy = blocks
        .iter()
        .enumerate()
        .map(|(j, block)| {
            let t = block[0];
            let reflected = (n_prime - t) % n_prime;
            let other = block_of[reflected as usize] as usize;
            if other == j {
                Conjugacy::SelfConjugate
            } else {
                Conjugacy::PairedWith(other)
            }
        })
        .collect();
    EigenPartition {
        n_prime,
        k,
        blocks,
        sizes,
        g1,
        conjugacy,
        block_of,
    }
}

/// An exact proportion `count / total`, displayed in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub count: u64,
    pub total: u64,
}

impl Proportion {
    pub fn new(count: u64, total: u64) -> Self {
        Self { count, total }
    }

    pub fn reduced(&self) -> (u64, u64) {
        let d = gcd(self.count, self.total).max(1);
        (self.count / d, self.total / d)
    }

    pub fn as_f64(&self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.reduced();
        if b == 1 {
            write!(f, "{a}")
        } else {
            write!(f, "{a}/{b}")
        }
    }
}

/// Proportion of residues in `Z_{n'}` with order below `g1`, by enumeration.
pub fn upsilon(params: &KCirculantParams) -> Proportion {
    upsilon_of(&eigen_partition(params))
}

pub fn upsilon_of(partition: &EigenPartition) -> Proportion {
    Proportion::new(partition.lower_order_count(), partition.n_prime)
}

/// Terms of the inclusion-exclusion count of lower-order residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionExclusion {
    /// `G_j` for `j = 1..=m`, where `m` is the number of distinct primes of `g1`.
    pub g_terms: Vec<u64>,
    /// `G_1 - G_2 + G_3 - ...`
    pub count: u64,
}

/// Counts `#{x : g_x < g1}` as an alternating sum over square-free divisors
/// `l` of `g1` of `gcd(k^{g1/l} - 1, n')`, given `g1`.
pub fn lower_order_count_ie_with(k: u64, n_prime: u64, g1: u64) -> InclusionExclusion {
    let primes: Vec<u64> = factorize(g1).into_iter().map(|(p, _)| p).collect();
    let m = primes.len();
    let mut g_terms = vec![0u64; m];
    for mask in 1u32..(1u32 << m) {
        let ell: u64 = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| primes[i])
            .product();
        // gcd(k^e - 1, n') only depends on k^e - 1 mod n'.
        let r = pow_mod(k, g1 / ell, n_prime);
        let shifted = (r + n_prime - 1) % n_prime;
        g_terms[mask.count_ones() as usize - 1] += gcd(shifted, n_prime);
    }
    let mut signed: i128 = 0;
    for (j, g) in g_terms.iter().enumerate() {
        if j % 2 == 0 {
            signed += *g as i128;
        } else {
            signed -= *g as i128;
        }
    }
    InclusionExclusion {
        g_terms,
        count: signed as u64,
    }
}

pub fn lower_order_count_ie(params: &KCirculantParams) -> u64 {
    let n_prime = params.n_prime;
    let g1 = if n_prime == 1 {
        1
    } else {
        orbit(1, params.k % n_prime, n_prime).1
    };
    lower_order_count_ie_with(params.k, n_prime, g1).count
}

/// Outcome of comparing `gcd(k^b ± 1, k^c ± 1)` with `k^{gcd(b,c)} + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GcdPowerBound {
    pub lhs: u128,
    pub bound: u128,
    pub holds: bool,
}

fn signed_power(k: u64, e: u64, plus: bool) -> Result<u128> {
    let p = (k as u128)
        .checked_pow(u32::try_from(e).map_err(|_| Error::Overflow("k^e"))?)
        .ok_or(Error::Overflow("k^e"))?;
    if plus {
        p.checked_add(1).ok_or(Error::Overflow("k^e + 1"))
    } else {
        Ok(p - 1)
    }
}

/// Evaluates both sides of `gcd(k^b ± 1, k^c ± 1) <= k^{gcd(b,c)} + 1`.
/// `plus_b`/`plus_c` select the sign on each side.
pub fn gcd_power_bound(k: u64, b: u64, c: u64, plus_b: bool, plus_c: bool) -> Result<GcdPowerBound> {
    if k < 2 || b == 0 || c == 0 {
        return Err(Error::InvalidArgument(format!(
            "gcd_power_bound needs k >= 2, b, c >= 1 (got k={k}, b={b}, c={c})"
        )));
    }
    let lhs = gcd_u128(signed_power(k, b, plus_b)?, signed_power(k, c, plus_c)?);
    let bound = signed_power(k, gcd(b, c), true)?;
    Ok(GcdPowerBound {
        lhs,
        bound,
        holds: lhs <= bound,
    })
}

/// Which congruence `k^g` satisfies modulo `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeCase {
    /// `k^g = -1 + s n`
    MinusOne { s: u128 },
    /// `k^g = 1 + s n`
    PlusOne { s: u128 },
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub case: RegimeCase,
    pub g1: u64,
    pub upsilon: Proportion,
}

/// Classifies `(g, k, n)` against `k^g = ±1 mod n` and reports the actual `g1`
/// and lower-order proportion. When `n = 2` both congruences coincide and
/// `PlusOne` is reported.
pub fn classify_regime(g: u64, k: u64, n: u64) -> Result<Regime> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if g == 0 {
        return Err(Error::InvalidArgument("g must be at least 1".into()));
    }
    if gcd(k % n, n) != 1 {
        return Err(Error::NotCoprime { k, n });
    }
    let r = pow_mod(k, g, n);
    let case = if r == 1 % n {
        let kg = signed_power(k, g, false)?;
        RegimeCase::PlusOne { s: kg / n as u128 }
    } else if r == n - 1 {
        let kg = signed_power(k, g, true)?;
        RegimeCase::MinusOne { s: kg / n as u128 }
    } else {
        RegimeCase::Neither
    };
    let params = decompose(n, k)?;
    let partition = eigen_partition(&params);
    Ok(Regime {
        case,
        g1: partition.g1,
        upsilon: upsilon_of(&partition),
    })
}

/// Smallest prime divisor of `g`, or `None` for `g = 1`.
pub fn smallest_prime_divisor(g: u64) -> Option<u64> {
    factorize(g).first().map(|&(p, _)| p)
}
