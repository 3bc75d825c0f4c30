//! Elementary arithmetic functions: Kronecker symbol, theta-multiplier units,
//! Möbius function, factorization, fundamental discriminants and the twisted
//! divisor sums used by the class number formulas.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

const SIEVE_LIMIT: usize = 1_000_000;

fn smallest_factor_table() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut spf = vec![0u32; SIEVE_LIMIT + 1];
        for i in 2..=SIEVE_LIMIT {
            if spf[i] == 0 {
                let mut j = i;
                while j <= SIEVE_LIMIT {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        spf
    })
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| match out.last_mut() {
        Some((q, e)) if *q == p => *e += 1,
        _ => out.push((p, 1)),
    };
    let mut m = n;
    if m <= SIEVE_LIMIT as u64 {
        let spf = smallest_factor_table();
        while m > 1 {
            let p = spf[m as usize] as u64;
            push(p, &mut out);
            m /= p;
        }
        return out;
    }
    let mut p = 2u64;
    while p * p <= m {
        while m.is_multiple_of(p) {
            push(p, &mut out);
            m /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        push(m, &mut out);
    }
    out
}

/// Distinct prime divisors.
pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

pub fn gcd_u(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Inverse of a modulo m, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let e = num_integer::Integer::extended_gcd(&a.rem_euclid(m), &m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// p-adic valuation of a non-zero integer.
pub fn valuation(p: u64, n: i64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut m = n.unsigned_abs();
    let mut v = 0;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    v
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Möbius function.
pub fn moebius(n: u64) -> i64 {
    assert!(n >= 1, "moebius needs n >= 1");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Jacobi symbol (a/n) for odd n > 0.
fn jacobi(a: i64, n: u64) -> i64 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut s = 1i64;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            s = -s;
        }
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

/// Kronecker symbol (a/n), fully extended to all integers n.
pub fn kronecker_symbol(a: i64, n: i64) -> i64 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut s = 1;
    let mut m = n;
    if m < 0 {
        m = -m;
        if a < 0 {
            s = -s;
        }
    }
    let tz = m.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                s = -s;
            }
        }
        m >>= tz;
    }
    s * jacobi(a, m as u64)
}

/// The theta-multiplier unit ε_d: 1 for d ≡ 1 mod 4 and i for d ≡ 3 mod 4.
pub fn epsilon_factor(d: i64) -> Result<Complex64> {
    match d.rem_euclid(4) {
        1 => Ok(Complex64::new(1.0, 0.0)),
        3 => Ok(Complex64::new(0.0, 1.0)),
        _ => Err(Error::Domain(format!(
            "epsilon_factor needs odd d, got {d}"
        ))),
    }
}

/// Whether t is a fundamental discriminant (t = 1 counts as the trivial one).
pub fn is_fundamental(t: i64) -> bool {
    if t == 0 {
        return false;
    }
    if t == 1 {
        return true;
    }
    match t.rem_euclid(4) {
        1 => is_squarefree(t.unsigned_abs()),
        0 => {
            let u = t / 4;
            matches!(u.rem_euclid(4), 2 | 3) && is_squarefree(u.unsigned_abs())
        }
        _ => false,
    }
}

/// A decomposition (−1)^k n = t m² with t fundamental or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalDecomposition {
    pub t: i64,
    pub m: u64,
}

/// Write a non-zero discriminant-like integer D as t m² with t fundamental.
pub fn discriminant_decomposition(d: i64) -> Option<FundamentalDecomposition> {
    if d == 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return None;
    }
    let sign = d.signum();
    let mut core = 1i64;
    let mut square = 1u64;
    for (p, e) in factorize(d.unsigned_abs()) {
        if e % 2 == 1 {
            core *= p as i64;
        }
        square *= p.pow(e / 2);
    }
    let s = sign * core;
    let t = if s.rem_euclid(4) == 1 { s } else { 4 * s };
    let q = d / t;
    if q <= 0 || d % t != 0 {
        return None;
    }
    let m = (q as f64).sqrt().round() as u64;
    let m = (m.saturating_sub(1)..=m + 1).find(|&x| x * x == q as u64)?;
    debug_assert!(m <= square);
    Some(FundamentalDecomposition { t, m })
}

/// The decomposition (−1)^k n = t m² with t fundamental or 1, if it exists.
pub fn fundamental_decomposition(k: u32, n: u64) -> Option<FundamentalDecomposition> {
    if n == 0 {
        return None;
    }
    let d = if k.is_multiple_of(2) { n as i64 } else { -(n as i64) };
    discriminant_decomposition(d)
}

fn rational_power(d: u64, s: i32) -> Rational {
    Rational::int_pow(d as i64, s)
}

/// σ_{ℓ,N,s}(r): sum of d^s over d | r with gcd(d, ℓ) = 1 and gcd(r/d, N/ℓ) = 1.
pub fn divisor_sigma(ell: u64, level: u64, s: i32, r: u64) -> Result<Rational> {
    if ell == 0 || level == 0 || !level.is_multiple_of(ell) {
        return Err(Error::Domain(format!(
            "divisor_sigma needs ell | N, got ell = {ell}, N = {level}"
        )));
    }
    if r == 0 {
        return Err(Error::Domain("divisor_sigma needs r >= 1".into()));
    }
    let cofactor = level / ell;
    Ok(divisors(r)
        .into_iter()
        .filter(|&d| gcd_u(d, ell) == 1 && gcd_u(r / d, cofactor) == 1)
        .map(|d| rational_power(d, s))
        .sum())
}

/// T^χ_{4N,s}(m) = Σ_{d | m, gcd(d, 4N) = 1} μ(d) χ_t(d) d^{s−1} σ_{4N,2s−1}(m/d).
pub fn t_sum(four_n: u64, s: i32, t: i64, m: u64) -> Result<Rational> {
    if four_n == 0 || !four_n.is_multiple_of(4) {
        return Err(Error::Domain(format!(
            "t_sum needs 4 | level, got {four_n}"
        )));
    }
    let mut acc = Rational::zero();
    for d in divisors(m) {
        if gcd_u(d, four_n) != 1 {
            continue;
        }
        let mu = moebius(d);
        let chi = kronecker_symbol(t, d as i64);
        if mu == 0 || chi == 0 {
            continue;
        }
        let sigma = divisor_sigma(four_n, four_n, 2 * s - 1, m / d)?;
        acc += Rational::from_int(mu * chi) * rational_power(d, s - 1) * sigma;
    }
    Ok(acc)
}
