//! Generalized Hurwitz class numbers H_{k,ℓ,N}(n), the Cohen–Eisenstein
//! q-expansions they form, holomorphic Eisenstein series, and formal harmonic
//! expansions with the ξ and raising operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::arith::{
    divisor_sigma, divisors, fundamental_decomposition, gcd_u, is_squarefree, kronecker_symbol,
    moebius, prime_factors,
};
use crate::error::{Error, Result};
use crate::kloosterman::{plus_zeta_closed, zeta_k_level};
use crate::rational::{incomplete_l_nonpositive, zeta_even_positive, PiRational, Rational};

/// A truncated q-expansion Σ_{n ≤ n_max} a(n) qⁿ with exact coefficients.
/// Only non-zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeries {
    pub n_max: u64,
    pub coefficients: BTreeMap<u64, Rational>,
}

impl QSeries {
    pub fn zero(n_max: u64) -> Self {
        QSeries {
            n_max,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn from_fn<F>(n_max: u64, f: F) -> Result<Self>
    where
        F: Fn(u64) -> Result<Rational> + Sync,
    {
        let values: Vec<Rational> = (0..=n_max).into_par_iter().map(&f).collect::<Result<_>>()?;
        let mut out = QSeries::zero(n_max);
        for (n, v) in values.into_iter().enumerate() {
            out.set(n as u64, v);
        }
        Ok(out)
    }

    pub fn coefficient(&self, n: u64) -> Rational {
        self.coefficients
            .get(&n)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Store a coefficient, dropping zeros and indices past the truncation.
    pub fn set(&mut self, n: u64, value: Rational) {
        if n > self.n_max {
            return;
        }
        if value.is_zero() {
            self.coefficients.remove(&n);
        } else {
            self.coefficients.insert(n, value);
        }
    }

    pub fn scale(&self, factor: &Rational) -> QSeries {
        let mut out = QSeries::zero(self.n_max);
        for (n, v) in &self.coefficients {
            out.set(*n, v * factor);
        }
        out
    }

    /// Sum of two series, truncated at the smaller bound.
    pub fn add(&self, other: &QSeries) -> QSeries {
        let n_max = self.n_max.min(other.n_max);
        let mut out = QSeries::zero(n_max);
        for n in self.coefficients.keys().chain(other.coefficients.keys()) {
            if *n <= n_max && !out.coefficients.contains_key(n) {
                out.set(*n, self.coefficient(*n) + other.coefficient(*n));
            }
        }
        out
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.coefficients.keys().copied()
    }

    /// One `n,numerator,denominator` row per index 0..=n_max.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,numerator,denominator\n");
        for n in 0..=self.n_max {
            let c = self.coefficient(n);
            let _ = writeln!(out, "{n},{},{}", c.numer(), c.denom());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut out = QSeries::zero(0);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('n')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", i + 1)));
            }
            let n: u64 = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad index", i + 1)))?;
            let value: Rational = format!("{}/{}", fields[1], fields[2]).parse()?;
            out.n_max = out.n_max.max(n);
            out.set(n, value);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_level(ell: u64, level: u64) -> Result<()> {
    if level == 0 || level.is_multiple_of(2) || !is_squarefree(level) {
        return Err(Error::Domain(format!(
            "level must be odd and squarefree, got {level}"
        )));
    }
    if ell == 0 || !level.is_multiple_of(ell) {
        return Err(Error::Domain(format!(
            "ell = {ell} does not divide N = {level}"
        )));
    }
    Ok(())
}

fn l_cache() -> &'static Mutex<HashMap<(u32, i64, u64), Rational>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, i64, u64), Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_l(k: u32, t: i64, modulus: u64) -> Result<Rational> {
    if let Some(v) = l_cache().lock().expect("cache lock").get(&(k, t, modulus)) {
        return Ok(v.clone());
    }
    let v = incomplete_l_nonpositive(k, t, modulus)?;
    l_cache()
        .lock()
        .expect("cache lock")
        .insert((k, t, modulus), v.clone());
    Ok(v)
}

/// The generalized Hurwitz class number H_{k,ℓ,N}(n).
pub fn hurwitz_class_number(k: u32, ell: u64, level: u64, n: u64) -> Result<Rational> {
    if k < 2 {
        return Err(Error::Domain(format!("class numbers need k > 1, got {k}")));
    }
    check_level(ell, level)?;
    if n == 0 {
        return if ell == level {
            cached_l(2 * k, 1, level)
        } else {
            Ok(Rational::zero())
        };
    }
    let Some(dec) = fundamental_decomposition(k, n) else {
        return Ok(Rational::zero());
    };
    let (t, m) = (dec.t, dec.m);
    let mut sum = Rational::zero();
    for a in divisors(m) {
        if gcd_u(a, level) != 1 {
            continue;
        }
        let coeff = moebius(a) * kronecker_symbol(t, a as i64);
        if coeff == 0 {
            continue;
        }
        let sigma = divisor_sigma(ell, level, 2 * k as i32 - 1, m / a)?;
        sum += Rational::from_int(coeff) * Rational::int_pow(a as i64, k as i32 - 1) * sigma;
    }
    if ell == level {
        return Ok(cached_l(k, t, level)? * sum);
    }
    let mut euler = Rational::one();
    for p in prime_factors(level / ell) {
        let chi = kronecker_symbol(t, p as i64);
        let pk = Rational::int_pow(p as i64, -(k as i32));
        euler *= (Rational::one() - Rational::from_int(chi) * &pk) / (Rational::one() - &pk * &pk);
    }
    Ok(cached_l(k, t, ell)? * euler * sum)
}

/// 𝓗_{k,ℓ,N} = Σ_{n ≥ 0} H_{k,ℓ,N}(n) qⁿ up to n_max.
pub fn cohen_eisenstein_series(k: u32, ell: u64, level: u64, n_max: u64) -> Result<QSeries> {
    check_level(ell, level)?;
    QSeries::from_fn(n_max, |n| hurwitz_class_number(k, ell, level, n))
}

fn zeta_one_minus(k: u32) -> Result<Rational> {
    cached_l(2 * k, 1, 1)
}

/// The exact Cohen–Eisenstein combination whose coefficients are the ξ-image
/// of the weight 3/2 − k plus space Eisenstein series:
/// (2k−1)/(3ζ(1−2k)) Σ_{ℓ|N} Π_{p|ℓ}(1−p^{2k−1})^{−1} Π_{p|N/ℓ}(p−1)/(p^{2k}−p) 𝓗_{k,ℓ,N}.
pub fn shadow_preimage_series(k: u32, level: u64, n_max: u64) -> Result<QSeries> {
    check_level(1, level)?;
    let mut out = QSeries::zero(n_max);
    for ell in divisors(level) {
        let mut w = Rational::one();
        for p in prime_factors(ell) {
            w *= (Rational::one() - Rational::int_pow(p as i64, 2 * k as i32 - 1)).recip();
        }
        for p in prime_factors(level / ell) {
            let p = p as i64;
            w *= Rational::from_int(p - 1)
                / (Rational::int_pow(p, 2 * k as i32) - Rational::from_int(p));
        }
        out = out.add(&cohen_eisenstein_series(k, ell, level, n_max)?.scale(&w));
    }
    let norm = Rational::from_int(2 * k as i64 - 1) / (Rational::from_int(3) * zeta_one_minus(k)?);
    Ok(out.scale(&norm))
}

/// An exact number of the form q·√r with q a rational multiple of a power of π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtScaled {
    pub coefficient: PiRational,
    pub radicand: u64,
}

impl SqrtScaled {
    pub fn to_f64(&self) -> f64 {
        self.coefficient.to_f64() * (self.radicand as f64).sqrt()
    }
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).map(Rational::from_int).product()
}

/// The normalized Cohen–Eisenstein side of the Shintani trace identity at
/// prime level p and even k: the scalar (−1)^{k/2}√p Γ(k)ζ(k)/(2^{k−1}π^kζ(1−2k))
/// and the series p^{−k}𝓗_{k,1,1} + (1−p^{−k})((p−1)/(p^{2k}−p)𝓗_{k,1,p} + 𝓗_{k,p,p}/(1−p^{2k−1})).
pub fn shintani_trace_series(k: u32, p: u64, n_max: u64) -> Result<(SqrtScaled, QSeries)> {
    if k % 2 == 1 || k < 2 {
        return Err(Error::Domain(format!(
            "the Shintani trace identity needs even k >= 2, got {k}"
        )));
    }
    if p < 3 || prime_factors(p) != vec![p] {
        return Err(Error::Domain(format!("p must be an odd prime, got {p}")));
    }
    let sign = if (k / 2).is_multiple_of(2) { 1 } else { -1 };
    let zeta_k = zeta_even_positive(k)?;
    let rational = Rational::from_int(sign) * factorial(k - 1) * zeta_k.coefficient.clone()
        / (Rational::int_pow(2, k as i32 - 1) * zeta_one_minus(k)?);
    let scalar = SqrtScaled {
        coefficient: PiRational::new(rational, zeta_k.pi_exponent - k as i32),
        radicand: p,
    };
    let pi = p as i64;
    let pk = Rational::int_pow(pi, -(k as i32));
    let w_mid =
        Rational::from_int(pi - 1) / (Rational::int_pow(pi, 2 * k as i32) - Rational::from_int(pi));
    let w_top = (Rational::one() - Rational::int_pow(pi, 2 * k as i32 - 1)).recip();
    let inner = cohen_eisenstein_series(k, 1, p, n_max)?
        .scale(&w_mid)
        .add(&cohen_eisenstein_series(k, p, p, n_max)?.scale(&w_top));
    let series = cohen_eisenstein_series(k, 1, 1, n_max)?
        .scale(&pk)
        .add(&inner.scale(&(Rational::one() - &pk)));
    Ok((scalar, series))
}

/// Coefficients of 𝓔_{2k,N} = 1 + 2ζ(2k)/ζ(1−2k) Σ 𝒦_N(0,n;2k) n^{2k−1} qⁿ.
pub fn holomorphic_eisenstein_coefficients(k: u32, level: u64, n_max: u64) -> Result<QSeries> {
    if level == 0 || !is_squarefree(level) {
        return Err(Error::NotSquarefree(level));
    }
    if k < 2 {
        return Err(Error::Domain(format!(
            "holomorphic Eisenstein series need k >= 2, got {k}"
        )));
    }
    let zeta = zeta_even_positive(2 * k)?;
    let front = Rational::from_int(2) * zeta.coefficient.clone() / zeta_one_minus(k)?;
    QSeries::from_fn(n_max, |n| {
        if n == 0 {
            return Ok(Rational::one());
        }
        let z = zeta_k_level(level, n as i64, k)?;
        if z.pi_exponent + zeta.pi_exponent != 0 {
            return Err(Error::PiExponentMismatch(z.pi_exponent, -zeta.pi_exponent));
        }
        Ok(&front * &z.coefficient * Rational::int_pow(n as i64, 2 * k as i32 - 1))
    })
}

/// The constant in front of 𝒦⁺(0, n; k + 1/2) in the Fourier coefficients of
/// the weight 3/2 − k plus space Eisenstein series: (2/3)(i/2)^{k−3/2}π,
/// principal branch.
pub fn plus_eisenstein_factor(k: u32) -> Complex64 {
    let e = k as f64 - 1.5;
    let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * e);
    phase * (2.0 / 3.0 * 0.5f64.powf(e) * std::f64::consts::PI)
}

/// The ξ-image coefficient at n > 0 predicted by the plus space Kloosterman
/// zeta values: −(4πn)^{k−1/2} conj(c⁻(−n)) with
/// c⁻(−n) = (2/3)(i/2)^{k−3/2}π/Γ(k−1/2) 𝒦⁺(0, −n; k + 1/2).
pub fn shadow_coefficient_from_zeta(k: u32, level: u64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new((k as f64 - 0.5) * 2.0 / 3.0, 0.0));
    }
    Ok(shadow_coefficient_with(
        k,
        n,
        plus_zeta_closed(k, level, -(n as i64))?,
    ))
}

/// The same map applied to a given value of 𝒦⁺(0, −n; k + 1/2), n > 0.
/// It is real-antilinear with operator norm |shadow_coefficient_with(k, n, 1)|.
pub fn shadow_coefficient_with(k: u32, n: u64, zeta: Complex64) -> Complex64 {
    let kf = k as f64;
    let c_minus = plus_eisenstein_factor(k) / gamma(kf - 0.5) * zeta;
    -c_minus.conj() * (4.0 * std::f64::consts::PI * n as f64).powf(kf - 0.5)
}

/// 𝒦⁺(0, −n; k + 1/2) rebuilt from the generalized Hurwitz class numbers:
/// conj of n^{1/2−k} Γ(k+1/2)(−2πi)^{−k−1/2} Σ_{ℓ|N} Π_{p|N/ℓ}(p−1)/(p(p^{2k−1}−1)) H_{k,ℓ,N}(n)/L_ℓ(1−2k).
pub fn plus_zeta_via_class_numbers(k: u32, level: u64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Domain(
            "the class number form of the plus space zeta value needs n > 0".into(),
        ));
    }
    check_level(1, level)?;
    let kf = k as f64;
    let mut sum = 0.0;
    for ell in divisors(level) {
        let weight: f64 = prime_factors(level / ell)
            .into_iter()
            .map(|p| {
                let p = p as f64;
                (p - 1.0) / (p * (p.powf(2.0 * kf - 1.0) - 1.0))
            })
            .product();
        sum +=
            weight * (hurwitz_class_number(k, ell, level, n)? / cached_l(2 * k, 1, ell)?).to_f64();
    }
    let base = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
    let front = gamma(kf + 0.5) / base.powf(kf + 0.5);
    Ok((front * sum * (n as f64).powf(0.5 - kf)).conj())
}

/// A Fourier coefficient that is either exact or only known numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Exact(Rational),
    Numeric(Complex64),
}

impl Coefficient {
    pub fn value(&self) -> Complex64 {
        match self {
            Coefficient::Exact(r) => Complex64::new(r.to_f64(), 0.0),
            Coefficient::Numeric(z) => *z,
        }
    }
}

/// Truncated Fourier data of a harmonic Maass form of weight κ:
/// Σ c⁺(n)qⁿ + c⁻(0)v^{1−κ} + Σ_{n≠0} c⁻(n)Γ(1−κ, −4πnv)qⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExpansion {
    pub weight: Rational,
    pub c_plus: BTreeMap<i64, Coefficient>,
    pub c_minus: BTreeMap<i64, Coefficient>,
}

/// One coefficient of a ξ-image, kept as scale · (4πn)^{exponent} · conj(source).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTerm {
    pub scale: Rational,
    pub four_pi_n_exponent: Rational,
    pub source: Coefficient,
}

impl XiTerm {
    pub fn value(&self, n: u64) -> Complex64 {
        let base = if self.four_pi_n_exponent.is_zero() {
            1.0
        } else {
            (4.0 * std::f64::consts::PI * n as f64).powf(self.four_pi_n_exponent.to_f64())
        };
        self.source.value().conj() * self.scale.to_f64() * base
    }
}

/// The weight 2 − κ holomorphic coefficients of ξ_κ h: the constant term
/// (1−κ)conj(c⁻(0)) and −(4πn)^{1−κ}conj(c⁻(−n)) for n > 0.
pub fn xi_coefficients(h: &HarmonicExpansion) -> BTreeMap<u64, XiTerm> {
    let one_minus = Rational::one() - &h.weight;
    let mut out = BTreeMap::new();
    for (n, c) in &h.c_minus {
        if *n > 0 || c.value().norm() == 0.0 {
            continue;
        }
        let term = if *n == 0 {
            XiTerm {
                scale: one_minus.clone(),
                four_pi_n_exponent: Rational::zero(),
                source: c.clone(),
            }
        } else {
            XiTerm {
                scale: -Rational::one(),
                four_pi_n_exponent: one_minus.clone(),
                source: c.clone(),
            }
        };
        if !term.scale.is_zero() {
            out.insert(n.unsigned_abs(), term);
        }
    }
    out
}

/// Fourier data of the weight 2 − 2k Eisenstein series 𝓕_{2−2k,N} at i∞:
/// c⁻(0) = 1, c⁺(n) = (−2i)^{2−2k}π𝒦_N(0,n;2k) for n ≥ 0 and
/// c⁻(n) = (−2i)^{2−2k}π𝒦_N(0,n;2k)/Γ(2k−1) for n < 0, exact in powers of π
/// and evaluated numerically.
pub fn weight_2_minus_2k_eisenstein(k: u32, level: u64, n_max: u64) -> Result<HarmonicExpansion> {
    if k < 2 {
        return Err(Error::Domain(format!("need k >= 2, got {k}")));
    }
    let front = Rational::from_int(-4).pow(1 - k as i32);
    let mut c_plus = BTreeMap::new();
    let mut c_minus = BTreeMap::new();
    c_minus.insert(0, Coefficient::Exact(Rational::one()));
    let constant = crate::kloosterman::zeta_k_constants(
        level,
        k,
        crate::kloosterman::ConstantKind::LevelInfinity,
    )?;
    c_plus.insert(
        0,
        Coefficient::Numeric(Complex64::new(
            front.to_f64() * std::f64::consts::PI * constant,
            0.0,
        )),
    );
    let gamma_fact = factorial(2 * k - 2);
    for n in 1..=n_max as i64 {
        let z = zeta_k_level(level, n, k)?;
        let pi_z = PiRational::new(&front * &z.coefficient, z.pi_exponent + 1);
        c_plus.insert(n, Coefficient::Numeric(Complex64::new(pi_z.to_f64(), 0.0)));
        let minus = PiRational::new(&pi_z.coefficient / &gamma_fact, pi_z.pi_exponent);
        c_minus.insert(
            -n,
            Coefficient::Numeric(Complex64::new(minus.to_f64(), 0.0)),
        );
    }
    Ok(HarmonicExpansion {
        weight: Rational::from_int(2 - 2 * k as i64),
        c_plus,
        c_minus,
    })
}

/// Iterated raising R^{times} applied to v^j from weight κ:
/// returns the accumulated scalar and the final exponent of v.
pub fn raise_scalar(kappa: &Rational, j: &Rational, times: u32) -> (Rational, Rational) {
    let mut scalar = Rational::one();
    let mut kappa = kappa.clone();
    let mut j = j.clone();
    for _ in 0..times {
        scalar *= &j + &kappa;
        j -= Rational::one();
        kappa += Rational::from_int(2);
    }
    (scalar, j)
}
