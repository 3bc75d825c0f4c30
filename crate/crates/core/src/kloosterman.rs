//! Kloosterman sums of half-integral and integral weight, their local Gauss
//! sum factors, and the associated Kloosterman zeta functions.
//!
//! Half-integral weights κ are passed as the odd integer `two_kappa = 2κ`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    discriminant_decomposition, divisor_sigma, divisors, factorize, gcd_u, is_squarefree,
    kronecker_symbol, mod_inverse, moebius, prime_factors, t_sum, valuation,
    FundamentalDecomposition,
};
use crate::error::{Error, Result};
use crate::rational::{incomplete_l_numeric, zeta_even_positive, PiRational, Rational};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// e^{2πi num/den} with the numerator reduced first.
fn unit_root(num: i64, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i64);
    let (s, c) = (2.0 * PI * r as f64 / den as f64).sin_cos();
    Complex64::new(c, s)
}

fn i_pow(e: i64) -> Complex64 {
    match e.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// ε_r^{2κ} for odd r.
fn epsilon_power(r: i64, two_kappa: i64) -> Complex64 {
    if r.rem_euclid(4) == 1 {
        ONE
    } else {
        i_pow(two_kappa)
    }
}

fn check_two_kappa(two_kappa: i64) -> Result<()> {
    if two_kappa.rem_euclid(2) != 1 {
        return Err(Error::Domain(format!(
            "weight must be a half-integer, got 2κ = {two_kappa}"
        )));
    }
    Ok(())
}

/// K_κ(m, n; c) = Σ_{r mod c, (r,c)=1} (c/r) ε_r^{2κ} e((m r* + n r)/c) by direct summation.
pub fn half_integral_kloosterman(two_kappa: i64, m: i64, n: i64, c: u64) -> Result<Complex64> {
    check_two_kappa(two_kappa)?;
    if c == 0 || !c.is_multiple_of(4) {
        return Err(Error::Domain(format!(
            "half-integral weight Kloosterman sums need 4 | c, got {c}"
        )));
    }
    let ci = c as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in (1..ci).step_by(2) {
        if gcd_u(r as u64, c) != 1 {
            continue;
        }
        let chi = kronecker_symbol(ci, r);
        let rinv = if m == 0 {
            0
        } else {
            mod_inverse(r, ci).expect("unit")
        };
        let phase_num =
            ((m as i128 * rinv as i128 + n as i128 * r as i128).rem_euclid(ci as i128)) as i64;
        acc += epsilon_power(r, two_kappa) * unit_root(phase_num, c) * chi as f64;
    }
    Ok(acc)
}

/// Σ_{z mod p^e, p ∤ z} (z/p)^e e(n z/p^e), in closed form.
fn odd_prime_power_sum(p: u64, e: u32, n: i64) -> Complex64 {
    let pe = p.pow(e);
    let pe1 = pe / p;
    let n_mod = n.rem_euclid(pe as i64) as u64;
    if e.is_multiple_of(2) {
        // Ramanujan sum c_{p^e}(n)
        if n_mod == 0 {
            Complex64::new((pe - pe1) as f64, 0.0)
        } else if n_mod.is_multiple_of(pe1) {
            Complex64::new(-(pe1 as f64), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else {
        if n_mod == 0 || !n_mod.is_multiple_of(pe1) {
            return Complex64::new(0.0, 0.0);
        }
        let reduced = (n_mod / pe1) as i64;
        let gauss = if p % 4 == 1 {
            Complex64::new((p as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (p as f64).sqrt())
        };
        gauss * (kronecker_symbol(reduced, p as i64) as f64 * pe1 as f64)
    }
}

/// K_κ(0, n; c) through the Chinese remainder factorization of the sum. Agrees
/// with [`half_integral_kloosterman`] at m = 0 and costs O(2^{ν₂(c)}) instead
/// of O(c).
pub fn half_integral_kloosterman_m0(two_kappa: i64, n: i64, c: u64) -> Result<Complex64> {
    check_two_kappa(two_kappa)?;
    if c == 0 || !c.is_multiple_of(4) {
        return Err(Error::Domain(format!(
            "half-integral weight Kloosterman sums need 4 | c, got {c}"
        )));
    }
    let a = c.trailing_zeros();
    let two_a = 1u64 << a;
    let q = c >> a;
    let mut odd = ONE;
    for (p, e) in factorize(q) {
        let pe = p.pow(e);
        let g = odd_prime_power_sum(p, e, n);
        if g.norm_sqr() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let cof = ((c / pe) % p) as i64;
        let sign = if e % 2 == 1 {
            kronecker_symbol(cof, p as i64)
        } else {
            1
        };
        odd *= g * sign as f64;
    }
    let q_inv = mod_inverse(q as i64, two_a as i64).unwrap_or(0) as i128;
    let q_sign = (q % 4 == 3) as i64;
    let mut two = Complex64::new(0.0, 0.0);
    for x in (1..two_a as i64).step_by(2) {
        let mut w = if a % 2 == 1 {
            kronecker_symbol(2, x)
        } else {
            1
        };
        if q_sign == 1 && x % 4 == 3 {
            w = -w;
        }
        let phase = (n as i128 * x as i128 * q_inv).rem_euclid(two_a as i128) as i64;
        two += epsilon_power(x, two_kappa) * unit_root(phase, two_a) * w as f64;
    }
    Ok(two * odd)
}

/// The classical Kloosterman sum Σ_{r mod c, (r,c)=1} e((m r* + n r)/c).
pub fn unit_kloosterman(m: i64, n: i64, c: u64) -> Result<Complex64> {
    if c == 0 {
        return Err(Error::Domain("unit_kloosterman needs c >= 1".into()));
    }
    if m == 0 {
        return Ok(Complex64::new(ramanujan_sum(n, c) as f64, 0.0));
    }
    let ci = c as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..ci {
        if gcd_u(r as u64, c) != 1 {
            continue;
        }
        let rinv = mod_inverse(r, ci).expect("unit");
        let num =
            ((m as i128 * rinv as i128 + n as i128 * r as i128).rem_euclid(ci as i128)) as i64;
        acc += unit_root(num, c);
    }
    Ok(acc)
}

/// Ramanujan sum c_c(n) as an exact integer.
pub fn ramanujan_sum(n: i64, c: u64) -> i64 {
    let g = gcd_u(n.unsigned_abs(), c);
    divisors(g)
        .into_iter()
        .map(|d| moebius(c / d) * d as i64)
        .sum()
}

fn check_squarefree(level: u64) -> Result<()> {
    if level == 0 || !is_squarefree(level) {
        return Err(Error::NotSquarefree(level));
    }
    Ok(())
}

/// The level N Kloosterman zeta value 𝒦_N(0, n; 2k) as an exact multiple of π^{−2k}.
pub fn zeta_k_level(level: u64, n: i64, k: u32) -> Result<PiRational> {
    check_squarefree(level)?;
    if n == 0 {
        return Err(Error::Domain("zeta_k_level needs n != 0".into()));
    }
    if k < 2 {
        return Err(Error::Domain("zeta_k_level needs k >= 2".into()));
    }
    let s = 2 * k as i32;
    let n = n.unsigned_abs();
    let mut sum = Rational::zero();
    for d in divisors(level) {
        let cof = level / d;
        if !n.is_multiple_of(cof) {
            continue;
        }
        let sigma = divisor_sigma(1, 1, 1 - s, n / cof)?;
        sum += Rational::from_int(moebius(d)) * Rational::new(1, d as i64) * sigma;
    }
    let mut factor = Rational::int_pow(level as i64, 1 - s);
    for p in prime_factors(level) {
        factor *= (Rational::one() - Rational::int_pow(p as i64, -s)).recip();
    }
    let inv_zeta = zeta_even_positive(2 * k)?.recip();
    Ok(inv_zeta.scale(&(factor * sum)))
}

/// Which constant-term Kloosterman zeta value to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantKind {
    /// 𝒦_N(0, 0; 2k), summed over moduli divisible by N.
    LevelInfinity,
    /// 𝒦̃_N(0, 0; 2k), summed over moduli coprime to N.
    Modified,
}

/// 𝒦_N(0, 0; 2k) or 𝒦̃_N(0, 0; 2k) numerically.
pub fn zeta_k_constants(level: u64, k: u32, which: ConstantKind) -> Result<f64> {
    check_squarefree(level)?;
    if k < 2 {
        return Err(Error::Domain("zeta_k_constants needs k >= 2".into()));
    }
    let s = 2.0 * k as f64;
    let ratio = incomplete_l_numeric(s - 1.0, 1, 1, 1e-14)? / zeta_even_positive(2 * k)?.to_f64();
    let euler = |d: u64| -> f64 {
        prime_factors(d)
            .into_iter()
            .map(|p| (1.0 - (p as f64).powf(1.0 - s)) / (1.0 - (p as f64).powf(-s)))
            .product()
    };
    Ok(match which {
        ConstantKind::Modified => ratio * euler(level),
        ConstantKind::LevelInfinity => {
            ratio
                * divisors(level)
                    .into_iter()
                    .map(|l| moebius(l) as f64 * euler(l))
                    .sum::<f64>()
        }
    })
}

/// The ε-normalized Gauss sum a_κ(p^j, n), κ ∈ {1/2, 3/2}, by direct summation.
pub fn local_factor_direct(two_kappa: i64, p: u64, j: u32, n: i64) -> Result<Complex64> {
    if two_kappa != 1 && two_kappa != 3 {
        return Err(Error::Domain(format!(
            "local factors are defined for κ = 1/2, 3/2, got 2κ = {two_kappa}"
        )));
    }
    if j == 0 {
        return Err(Error::Domain("local factors need j >= 1".into()));
    }
    let q = p.pow(j);
    let qi = q as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    if p == 2 {
        for r in (1..=qi).step_by(2) {
            let eps = if r % 4 == 1 {
                ONE
            } else if two_kappa == 1 {
                I
            } else {
                -I
            };
            acc += eps * unit_root(n.rem_euclid(qi) * r % qi, q) * kronecker_symbol(qi, r) as f64;
        }
        Ok(acc)
    } else {
        for r in 1..=qi {
            let chi = kronecker_symbol(r, qi);
            if chi != 0 {
                acc += unit_root(n.rem_euclid(qi) * r % qi, q) * chi as f64;
            }
        }
        let eps = if q % 4 == 1 { ONE } else { I };
        Ok(if two_kappa == 1 { acc / eps } else { acc * eps })
    }
}

/// Σ_{j ≥ j₀} a_κ(p^j, n)/p^{j(k+1/2)} with j₀ = 2 for p = 2 and j₀ = 1 otherwise.
/// Finite for n ≠ 0 since the Gauss sums vanish past ν_p(n) + 3 (p = 2) or
/// ν_p(n) + 1 (odd p); geometric at n = 0.
pub fn local_factor_series(two_kappa: i64, k: u32, p: u64, n: i64) -> Result<Complex64> {
    if two_kappa != 1 && two_kappa != 3 {
        return Err(Error::Domain(format!(
            "local factors are defined for κ = 1/2, 3/2, got 2κ = {two_kappa}"
        )));
    }
    let kf = k as f64;
    let pf = p as f64;
    if n == 0 {
        let x = pf.powf(1.0 - 2.0 * kf);
        return Ok(if p == 2 {
            let unit = if two_kappa == 1 { ONE + I } else { ONE - I };
            unit * (0.25 * x / (1.0 - x))
        } else {
            Complex64::new((1.0 - 1.0 / pf) * x / (1.0 - x), 0.0)
        });
    }
    let (start, stop) = if p == 2 {
        (2, valuation(2, n) + 3)
    } else {
        (1, valuation(p, n) + 1)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for j in start..=stop {
        acc += local_factor_direct(two_kappa, p, j, n)? * pf.powf(-(j as f64) * (kf + 0.5));
    }
    Ok(acc)
}

/// The closed-form local factor A_k(p, n) (with n = 0 giving the limiting values).
pub fn local_factor_closed(k: u32, p: u64, n: i64) -> Result<Complex64> {
    if k < 2 {
        return Err(Error::Domain("local factors need k >= 2".into()));
    }
    let r = k as f64;
    let pf = p as f64;
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    if p == 2 {
        let unit = Complex64::new(1.0, sign as f64);
        if n == 0 {
            return Ok(unit / (2f64.powi(2 * k as i32 + 1) - 4.0));
        }
        let v = valuation(2, n);
        let x = sign * n / (1i64 << v);
        let q = 2f64.powf(1.0 - 2.0 * r);
        let body = if v % 2 == 1 {
            let h = q.powf((v as f64 - 1.0) / 2.0);
            (1.0 - h) / (1.0 - q) - h
        } else {
            let h = q.powf(v as f64 / 2.0);
            if x.rem_euclid(4) == 3 {
                (1.0 - h) / (1.0 - q) - h
            } else {
                (1.0 - h) / (1.0 - q)
                    + h * (1.0 + 2f64.powf(1.0 - r) * kronecker_symbol(x, 2) as f64)
            }
        };
        return Ok(unit * body * 2f64.powf(-(2.0 * r + 1.0)));
    }
    let base = (pf - 1.0) / (pf * (pf.powf(2.0 * r - 1.0) - 1.0));
    if n == 0 {
        return Ok(Complex64::new(base, 0.0));
    }
    let v = valuation(p, n) as f64;
    let value = if valuation(p, n) % 2 == 1 {
        base * (1.0 - pf.powf((1.0 - 2.0 * r) * (v - 1.0) / 2.0))
            - pf.powf((1.0 - 2.0 * r) * (v + 1.0) / 2.0 - 1.0)
    } else {
        let x = sign * n / (p as i64).pow(valuation(p, n));
        base * (1.0 - pf.powf((1.0 - 2.0 * r) * v / 2.0))
            + kronecker_symbol(x, p as i64) as f64
                * pf.powf((1.0 - 2.0 * r) * (v + 1.0) / 2.0 - 0.5)
    };
    Ok(Complex64::new(value, 0.0))
}

/// κ ∈ {1/2, 3/2} paired with k: 1/2 for odd k, 3/2 for even k.
pub fn paired_two_kappa(k: u32) -> i64 {
    if k % 2 == 1 {
        1
    } else {
        3
    }
}

/// Whether n lies in the plus space support for weight κ: (−1)^{κ−1/2} n ≡ 0, 1 mod 4.
pub fn in_plus_space(two_kappa: i64, n: i64) -> bool {
    let signed = if ((two_kappa - 1) / 2).rem_euclid(2) == 0 {
        n
    } else {
        -n
    };
    matches!(signed.rem_euclid(4), 0 | 1)
}

/// Truncated plus space series together with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// 𝒦⁺_{κ,4N}(0, n; k + 1/2) summed over c ≤ c_max. The tail bound uses
/// |K_κ(0, n; c)| ≤ c.
pub fn plus_zeta_direct(
    two_kappa: i64,
    level: u64,
    n: i64,
    k: u32,
    c_max: u64,
) -> Result<TruncatedValue> {
    check_two_kappa(two_kappa)?;
    if level == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    if k < 2 {
        return Err(Error::Domain("plus space zeta values need k >= 2".into()));
    }
    let s = k as f64 + 0.5;
    let terms: Vec<Complex64> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let modulus = 4 * level * c;
            let weight = if c % 2 == 1 { 2.0 } else { 1.0 };
            let kl = half_integral_kloosterman_m0(two_kappa, n, modulus).expect("valid modulus");
            kl * (weight * (modulus as f64).powf(-s))
        })
        .collect();
    let value = terms
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    let four_n = 4.0 * level as f64;
    let tail_bound = if c_max == 0 {
        f64::INFINITY
    } else {
        2.0 * four_n.powf(1.0 - s) * (c_max as f64).powf(2.0 - s) / (s - 2.0)
    };
    Ok(TruncatedValue { value, tail_bound })
}

/// Closed form of 𝒦⁺_{κ,4N}(0, n; k + 1/2) with local factors from the finite
/// Gauss sum series, for either κ ∈ {1/2, 3/2}. Returns 0 off the plus space.
pub fn plus_zeta_local(two_kappa: i64, k: u32, level: u64, n: i64) -> Result<Complex64> {
    plus_zeta_with(two_kappa, k, level, n, |p, n| {
        local_factor_series(two_kappa, k, p, n)
    })
}

/// Closed form of 𝒦⁺_{κ,4N}(0, n; k + 1/2) with κ paired to the parity of k
/// and local factors conj(A_k(p, −n)). Returns 0 off the plus space.
pub fn plus_zeta_closed(k: u32, level: u64, n: i64) -> Result<Complex64> {
    let two_kappa = paired_two_kappa(k);
    plus_zeta_with(two_kappa, k, level, n, |p, n| {
        if p == 2 {
            Ok(local_factor_closed(k, 2, -n)?.conj())
        } else {
            local_factor_closed(k, p, -n)
        }
    })
}

fn plus_zeta_with<F>(two_kappa: i64, k: u32, level: u64, n: i64, local: F) -> Result<Complex64>
where
    F: Fn(u64, i64) -> Result<Complex64>,
{
    check_squarefree(level)?;
    if level.is_multiple_of(2) {
        return Err(Error::Domain(format!("level must be odd, got {level}")));
    }
    if k < 2 {
        return Err(Error::Domain("plus space zeta values need k >= 2".into()));
    }
    let four_n = 4 * level;
    let kf = k as f64;
    let s_local = 2f64.powf(-2.0 * (kf + 0.5));
    let four_term = local_factor_direct(two_kappa, 2, 2, n)? * s_local;
    let odd: Complex64 = prime_factors(level)
        .into_iter()
        .map(|p| local(p, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(ONE, |a, b| a * b);
    let l_even = incomplete_l_numeric(2.0 * kf, 1, four_n, 1e-14)?;
    if n == 0 {
        let ratio = incomplete_l_numeric(2.0 * kf - 1.0, 1, four_n, 1e-14)? / l_even;
        return Ok((local(2, 0)? + four_term) * odd * ratio);
    }
    if !in_plus_space(two_kappa, n) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let signed = if two_kappa == 1 { n } else { -n };
    let Some(FundamentalDecomposition { t, m }) = discriminant_decomposition(signed) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let ratio = incomplete_l_numeric(kf, t, four_n, 1e-14)? / l_even;
    let tsum = t_sum(four_n, 1 - k as i32, t, m)?.to_f64();
    Ok((local(2, n)? + four_term) * odd * (ratio * tsum))
}

/// Kohnen's plus space Kloosterman sum at (0, D; c), which is real.
pub fn kohnen_plus_sum(k: u32, d: i64, c: u64) -> Result<f64> {
    if c == 0 {
        return Err(Error::Domain("kohnen_plus_sum needs c >= 1".into()));
    }
    let unit = Complex64::new(1.0, if k.is_multiple_of(2) { -1.0 } else { 1.0 });
    let weight = if c % 2 == 1 { 2.0 } else { 1.0 };
    let kl = half_integral_kloosterman_m0(2 * k as i64 + 1, d, 4 * c)?;
    Ok((unit * kl * (weight / (4.0 * c as f64))).re)
}

/// Memo of local Gauss sums keyed by (2κ, p, j, n), for sweeps that revisit
/// the same arguments.
#[derive(Debug, Default)]
pub struct LocalFactorCache {
    map: HashMap<(i64, u64, u32, i64), Complex64>,
}

impl LocalFactorCache {
    pub fn get(&mut self, two_kappa: i64, p: u64, j: u32, n: i64) -> Result<Complex64> {
        if let Some(v) = self.map.get(&(two_kappa, p, j, n)) {
            return Ok(*v);
        }
        let v = local_factor_direct(two_kappa, p, j, n)?;
        self.map.insert((two_kappa, p, j, n), v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn kloosterman_small_examples() {
        let k = |tk, m, n, c| half_integral_kloosterman(tk, m, n, c).unwrap();
        assert!(close(k(1, 0, 0, 4), Complex64::new(1.0, 1.0), 1e-14));
        assert!(close(k(3, 0, 0, 4), Complex64::new(1.0, -1.0), 1e-14));
        assert!(close(k(5, 0, 0, 4), Complex64::new(1.0, 1.0), 1e-14));
        assert!(half_integral_kloosterman(1, 0, 0, 6).is_err());
        assert!(half_integral_kloosterman(2, 0, 0, 4).is_err());
    }

    #[test]
    fn unit_kloosterman_examples() {
        for c in 1..30u64 {
            assert_eq!(
                unit_kloosterman(0, 0, c).unwrap().re,
                crate::arith::euler_phi(c) as f64
            );
        }
        assert!(close(
            unit_kloosterman(0, 1, 4).unwrap(),
            Complex64::new(0.0, 0.0),
            1e-14
        ));
        assert!(close(
            unit_kloosterman(0, 2, 4).unwrap(),
            Complex64::new(-2.0, 0.0),
            1e-14
        ));
        // Ramanujan sums against the exponential definition
        for c in 1..40u64 {
            for n in -20..20i64 {
                let direct: Complex64 = (0..c as i64)
                    .filter(|&r| gcd_u(r as u64, c) == 1)
                    .map(|r| unit_root(n * r, c))
                    .sum();
                assert!(close(
                    direct,
                    Complex64::new(ramanujan_sum(n, c) as f64, 0.0),
                    1e-10
                ));
            }
        }
        // classical Kloosterman sums are real
        assert!(unit_kloosterman(3, 5, 17).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn fast_kloosterman_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let c = 4 * rng.gen_range(1..300u64);
            let n = rng.gen_range(-40..40i64);
            let tk = [1i64, 3, 5, -1, -3, 7][rng.gen_range(0..6)];
            let slow = half_integral_kloosterman(tk, 0, n, c).unwrap();
            let fast = half_integral_kloosterman_m0(tk, n, c).unwrap();
            assert!(
                close(slow, fast, 1e-9),
                "2κ={tk} n={n} c={c}: {slow} vs {fast}"
            );
        }
        for c in [4u64, 8, 16, 32, 64, 4 * 27, 4 * 125, 4 * 9 * 25, 8 * 49 * 3] {
            for n in [-36i64, -9, -4, -1, 0, 1, 3, 12, 45] {
                let slow = half_integral_kloosterman(3, 0, n, c).unwrap();
                let fast = half_integral_kloosterman_m0(3, n, c).unwrap();
                assert!(close(slow, fast, 1e-9), "n={n} c={c}");
            }
        }
    }

    #[test]
    fn reflection_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let tk = [1i64, 3, 5, 7][rng.gen_range(0..4)];
            let m = rng.gen_range(-20..=20i64);
            let n = rng.gen_range(-20..=20i64);
            let c = 4 * rng.gen_range(1..=60u64);
            let lhs = half_integral_kloosterman(tk, m, n, c).unwrap();
            let sign = if ((tk - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let r1 = I * sign * half_integral_kloosterman(4 - tk, -n, -m, c).unwrap();
            let r2 = I * sign * half_integral_kloosterman(4 - tk, -m, -n, c).unwrap();
            assert!(close(lhs, r1, 1e-9));
            assert!(close(lhs, r2, 1e-9));
            assert_eq!(lhs, half_integral_kloosterman(tk + 4, m, n, c).unwrap());
        }
    }

    #[test]
    fn local_factor_examples() {
        let a = |tk, p, j, n| local_factor_direct(tk, p, j, n).unwrap();
        assert!(close(a(1, 2, 2, 0), Complex64::new(1.0, 1.0), 1e-12));
        assert!(close(a(3, 2, 2, 1), Complex64::new(-1.0, 1.0), 1e-12));
        // ε₃^{−1} Σ (r/3) e(r/3) = (1/i)(i√3) = √3
        assert!(close(
            a(1, 3, 1, 1),
            Complex64::new(3f64.sqrt(), 0.0),
            1e-12
        ));
        for n in -8..8i64 {
            let expect_half = if matches!(n.rem_euclid(4), 0 | 1) {
                1.0
            } else {
                -1.0
            };
            assert!(close(
                a(1, 2, 2, n),
                Complex64::new(expect_half, expect_half),
                1e-12
            ));
            let expect = if matches!(n.rem_euclid(4), 0 | 3) {
                1.0
            } else {
                -1.0
            };
            assert!(close(a(3, 2, 2, n), Complex64::new(expect, -expect), 1e-12));
        }
    }

    #[test]
    fn closed_local_factor_examples() {
        assert!(close(
            local_factor_closed(2, 3, 0).unwrap(),
            Complex64::new(1.0 / 39.0, 0.0),
            1e-15
        ));
        assert!(close(
            local_factor_closed(2, 2, 0).unwrap(),
            Complex64::new(1.0 / 28.0, 1.0 / 28.0),
            1e-15
        ));
        // the geometric limit agrees with the conjugated closed value at n = 0
        for k in 2..6 {
            for p in [2u64, 3, 5, 7] {
                let series = local_factor_series(paired_two_kappa(k), k, p, 0).unwrap();
                assert!(close(
                    series,
                    local_factor_closed(k, p, 0).unwrap().conj(),
                    1e-15
                ));
            }
        }
    }

    #[test]
    fn gauss_sums_vanish_past_valuation() {
        for tk in [1i64, 3] {
            for n in [-24i64, -5, -3, 1, 2, 7, 12, 18, 45, 50] {
                for p in [3u64, 5, 7] {
                    let v = valuation(p, n);
                    for j in v + 2..v + 4 {
                        if p.pow(j) > 200_000 {
                            continue;
                        }
                        assert!(
                            local_factor_direct(tk, p, j, n).unwrap().norm() < 1e-8,
                            "p={p} j={j} n={n}"
                        );
                    }
                }
                let v = valuation(2, n);
                for j in v + 4..v + 6 {
                    assert!(local_factor_direct(tk, 2, j, n).unwrap().norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn series_matches_conjugated_closed_factor() {
        for p in [2u64, 3, 5, 7] {
            for k in 2..=4u32 {
                for n in -300..=300i64 {
                    if n == 0 || valuation(p, n) > 4 {
                        continue;
                    }
                    let series = local_factor_series(paired_two_kappa(k), k, p, n).unwrap();
                    let closed = local_factor_closed(k, p, -n).unwrap().conj();
                    assert!(
                        close(series, closed, 1e-10),
                        "p={p} k={k} n={n}: {series} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn level_zeta_examples() {
        let z = zeta_k_level(1, 1, 2).unwrap();
        assert_eq!(z, PiRational::new(Rational::from_int(90), -4));
        let z = zeta_k_level(1, 2, 2).unwrap();
        assert_eq!(z, PiRational::new(Rational::new(90 * 9, 8), -4));
        assert!(zeta_k_level(4, 1, 2).is_err());
    }

    fn level_zeta_series(level: u64, n: i64, s: f64, c_max: u64) -> f64 {
        (1..=c_max / level)
            .map(|j| ramanujan_sum(n, j * level) as f64 * ((j * level) as f64).powf(-s))
            .sum()
    }

    #[test]
    fn level_zeta_against_truncated_series() {
        for level in [1u64, 3, 5, 15] {
            for n in [1i64, 2, 3, 5, 6, 9, 15, 30] {
                for k in [2u32, 3] {
                    let exact = zeta_k_level(level, n, k).unwrap().to_f64();
                    let series = level_zeta_series(level, n, 2.0 * k as f64, 200_000);
                    assert!(
                        (exact - series).abs() < 1e-6,
                        "N={level} n={n} k={k}: {exact} vs {series}"
                    );
                }
            }
        }
    }

    #[test]
    fn ramanujan_remark_identity() {
        for level in [1u64, 3, 5, 15] {
            for n in 1..=50i64 {
                for k in [2u32, 3] {
                    let lhs = zeta_k_level(level, n, k).unwrap().to_f64();
                    let rhs: f64 = divisors(level)
                        .into_iter()
                        .map(|d| {
                            let sigma = divisor_sigma(d, d, 1 - 2 * k as i32, n as u64)
                                .unwrap()
                                .to_f64();
                            let l = incomplete_l_numeric(2.0 * k as f64, 1, d, 1e-14).unwrap();
                            moebius(d) as f64 * sigma / l
                        })
                        .sum();
                    assert!(
                        (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
                        "N={level} n={n} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn constants_examples() {
        let z3 = 1.202_056_903_159_594_2;
        let z4 = PI.powi(4) / 90.0;
        let a = zeta_k_constants(1, 2, ConstantKind::LevelInfinity).unwrap();
        assert!((a - z3 / z4).abs() < 1e-13);
        assert!((a - 1.1106).abs() < 1e-4);
        let b = zeta_k_constants(1, 2, ConstantKind::Modified).unwrap();
        assert!((b - z3 / z4).abs() < 1e-13);
        let c = zeta_k_constants(3, 2, ConstantKind::Modified).unwrap();
        assert!((c - z3 / z4 * (1.0 - 3f64.powi(-3)) / (1.0 - 3f64.powi(-4))).abs() < 1e-13);
        // truncated definitions
        let lev: f64 = (1..=100_000u64)
            .filter(|c| c % 3 == 0)
            .map(|c| crate::arith::euler_phi(c) as f64 / (c as f64).powi(4))
            .sum();
        assert!((zeta_k_constants(3, 2, ConstantKind::LevelInfinity).unwrap() - lev).abs() < 1e-8);
        let modi: f64 = (1..=100_000u64)
            .filter(|c| c % 3 != 0)
            .map(|c| crate::arith::euler_phi(c) as f64 / (c as f64).powi(4))
            .sum();
        assert!((c - modi).abs() < 1e-8);
    }

    #[test]
    fn plus_zeta_closed_forms_agree() {
        for k in 2..=4u32 {
            for level in [1u64, 3, 5, 15] {
                for n in -40..=40i64 {
                    let a = plus_zeta_closed(k, level, n).unwrap();
                    let b = plus_zeta_local(paired_two_kappa(k), k, level, n).unwrap();
                    assert!(
                        close(a, b, 1e-12 * a.norm().max(1e-300)),
                        "k={k} N={level} n={n}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn plus_zeta_closed_matches_direct() {
        // both κ, both signs of n, plus space indices only
        for (k, level) in [(2u32, 1u64), (2, 3), (3, 1), (3, 3)] {
            for tk in [1i64, 3] {
                for n in -12..=12i64 {
                    if n != 0 && !in_plus_space(tk, n) {
                        continue;
                    }
                    let closed = plus_zeta_local(tk, k, level, n).unwrap();
                    let direct = plus_zeta_direct(tk, level, n, k, 3000).unwrap();
                    assert!(
                        (closed - direct.value).norm() <= direct.tail_bound,
                        "k={k} N={level} 2κ={tk} n={n}: {closed} vs {}",
                        direct.value
                    );
                    if k == 3 {
                        assert!((closed - direct.value).norm() < 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn plus_zeta_constant_term_remark() {
        // N = 1, k even: (1 − i)/2^{2k} · ζ(2k − 1)/ζ(2k)
        for k in [2u32, 4] {
            let v = plus_zeta_closed(k, 1, 0).unwrap();
            let z = incomplete_l_numeric(2.0 * k as f64 - 1.0, 1, 1, 1e-14).unwrap()
                / incomplete_l_numeric(2.0 * k as f64, 1, 1, 1e-14).unwrap();
            let expect = Complex64::new(1.0, -1.0) * z / 2f64.powi(2 * k as i32);
            assert!(close(v, expect, 1e-14));
        }
        let direct = plus_zeta_direct(1, 1, 0, 2, 0).unwrap();
        assert_eq!(direct.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kohnen_sum_examples() {
        assert!((kohnen_plus_sum(2, 1, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((kohnen_plus_sum(2, 5, 1).unwrap() - 1.0).abs() < 1e-12);
        for k in [2u32, 3] {
            for d in [1i64, 4, 5, 8, 12] {
                for c in 1..40u64 {
                    let unit = Complex64::new(1.0, if k % 2 == 0 { -1.0 } else { 1.0 });
                    let w = if c % 2 == 1 { 2.0 } else { 1.0 };
                    let full = unit
                        * half_integral_kloosterman(2 * k as i64 + 1, 0, d, 4 * c).unwrap()
                        * (w / (4.0 * c as f64));
                    assert!(full.im.abs() < 1e-10);
                }
            }
        }
    }
}
