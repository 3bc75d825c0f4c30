//! Integral binary quadratic forms with level structure: Γ₀(N)-classes of
//! negative discriminant, Heegner points, square root counts and the
//! real and imaginary quadratic traces.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::arith::{factorize, gcd, gcd_u, kronecker_symbol};
use crate::eis::eval_f0;
use crate::error::{Error, Result};

/// A 2×2 integer matrix [[p, q], [r, s]] stored row-major.
pub type Mat2 = [[i64; 2]; 2];

pub const IDENTITY: Mat2 = [[1, 0], [0, 1]];

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Inverse of a determinant one matrix.
pub fn mat_inv(x: &Mat2) -> Mat2 {
    [[x[1][1], -x[0][1]], [-x[1][0], x[0][0]]]
}

pub fn det(x: &Mat2) -> i64 {
    x[0][0] * x[1][1] - x[0][1] * x[1][0]
}

/// Möbius action (pτ + q)/(rτ + s).
pub fn mobius_action(g: &Mat2, tau: Complex64) -> Complex64 {
    (tau * g[0][0] as f64 + g[0][1] as f64) / (tau * g[1][0] as f64 + g[1][1] as f64)
}

/// The form a x² + b xy + c y².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_positive_definite(&self) -> bool {
        self.discriminant() < 0 && self.a > 0
    }

    pub fn negate(&self) -> Self {
        QuadForm::new(-self.a, -self.b, -self.c)
    }

    pub fn content(&self) -> i64 {
        gcd(gcd(self.a, self.b), self.c)
    }

    /// Q∘g, the form (x, y) ↦ Q(px + qy, rx + sy).
    pub fn act(&self, g: &Mat2) -> QuadForm {
        let [[p, q], [r, s]] = *g;
        QuadForm {
            a: self.eval(p, r),
            b: 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s,
            c: self.eval(q, s),
        }
    }

    /// The root τ_Q = −b/(2a) + i√|D|/(2|a|) of Q(τ, 1) in the upper half plane.
    pub fn heegner_point(&self) -> Result<Complex64> {
        let d = self.discriminant();
        if d >= 0 || self.a == 0 {
            return Err(Error::Domain(format!("form {self:?} has no Heegner point")));
        }
        let a = self.a as f64;
        Ok(Complex64::new(
            -(self.b as f64) / (2.0 * a),
            ((-d) as f64).sqrt() / (2.0 * a.abs()),
        ))
    }
}

/// Reduce a positive definite form: returns (R, g) with Q∘g = R, |b| ≤ a ≤ c
/// and b ≥ 0 whenever |b| = a or a = c.
pub fn sl2_reduce(q: &QuadForm) -> Result<(QuadForm, Mat2)> {
    if !q.is_positive_definite() {
        return Err(Error::Domain(format!(
            "sl2_reduce needs a positive definite form, got {q:?}"
        )));
    }
    let s_mat: Mat2 = [[0, -1], [1, 0]];
    let mut f = *q;
    let mut g = IDENTITY;
    loop {
        let n = Integer::div_floor(&(f.a - f.b), &(2 * f.a));
        if n != 0 {
            let t: Mat2 = [[1, n], [0, 1]];
            f = f.act(&t);
            g = mat_mul(&g, &t);
        }
        if f.a > f.c || (f.a == f.c && f.b < 0) {
            f = f.act(&s_mat);
            g = mat_mul(&g, &s_mat);
            continue;
        }
        break;
    }
    debug_assert_eq!(q.act(&g), f);
    Ok((f, g))
}

/// All g ∈ SL₂(ℤ) with R∘g = R for a reduced positive definite R
/// (6 elements for forms like [1,1,1], 4 for [1,0,1], 2 otherwise).
pub fn automorphisms(reduced: &QuadForm) -> Vec<Mat2> {
    let mut out = Vec::new();
    for p in -1..=1 {
        for q in -1..=1 {
            for r in -1..=1 {
                for s in -1..=1 {
                    let g = [[p, q], [r, s]];
                    if det(&g) == 1 && reduced.act(&g) == *reduced {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

fn definite_pair(q1: &QuadForm, q2: &QuadForm) -> Result<(QuadForm, QuadForm)> {
    let d = q1.discriminant();
    if d != q2.discriminant() {
        return Err(Error::DiscriminantMismatch(d, q2.discriminant()));
    }
    if d >= 0 {
        return Err(Error::Domain(format!(
            "equivalence testing needs D < 0, got {d}"
        )));
    }
    match (q1.a > 0, q2.a > 0) {
        (true, true) => Ok((*q1, *q2)),
        (false, false) => Ok((q1.negate(), q2.negate())),
        _ => Err(Error::Domain(
            "forms of opposite definiteness are never equivalent".into(),
        )),
    }
}

/// Matrices g ∈ SL₂(ℤ) with Q1∘g = Q2.
pub fn transporters(q1: &QuadForm, q2: &QuadForm) -> Result<Vec<Mat2>> {
    let (q1, q2) = definite_pair(q1, q2)?;
    let (r1, g1) = sl2_reduce(&q1)?;
    let (r2, g2) = sl2_reduce(&q2)?;
    if r1 != r2 {
        return Ok(Vec::new());
    }
    let g2_inv = mat_inv(&g2);
    Ok(automorphisms(&r1)
        .iter()
        .map(|h| mat_mul(&mat_mul(&g1, h), &g2_inv))
        .collect())
}

/// Whether some g ∈ Γ₀(N) carries Q1 to Q2.
pub fn gamma0_equivalent(q1: &QuadForm, q2: &QuadForm, level: u64) -> Result<bool> {
    if q1.a.signum() != q2.a.signum() {
        if q1.discriminant() != q2.discriminant() {
            return Err(Error::DiscriminantMismatch(
                q1.discriminant(),
                q2.discriminant(),
            ));
        }
        return Ok(false);
    }
    let n = level as i64;
    Ok(transporters(q1, q2)?.iter().any(|g| g[1][0] % n == 0))
}

/// Order of the image of the Γ₀(N)-stabilizer of Q in PSL₂(ℤ).
pub fn stabilizer_order(q: &QuadForm, level: u64) -> Result<u32> {
    let n = level as i64;
    let count = transporters(q, q)?
        .iter()
        .filter(|g| g[1][0] % n == 0)
        .count();
    Ok((count / 2) as u32)
}

/// A Γ₀(N)-class of forms of negative discriminant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeegnerClass {
    pub representative: QuadForm,
    pub stabilizer_order: u32,
    pub point: Complex64,
}

/// Truncation parameters shared by the trace and Eisenstein evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub a_max: u64,
    pub lattice_bound: u64,
    pub c_max: u64,
    pub tol: f64,
    pub report_tails: bool,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            a_max: 50_000,
            lattice_bound: 3000,
            c_max: 20_000,
            tol: 1e-9,
            report_tails: true,
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.a_max == 0 || self.lattice_bound == 0 || self.c_max == 0 || !(self.tol > 0.0) {
            return Err(Error::Config(
                "truncation parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Points of P¹(ℤ/N) as canonical pairs (p, r).
fn projective_line(level: u64) -> Vec<(i64, i64)> {
    let n = level as i64;
    let units: Vec<i64> = (1..=n).filter(|&u| gcd(u, n) == 1).collect();
    let mut seen = std::collections::BTreeSet::new();
    for p in 0..n {
        for r in 0..n {
            if gcd(gcd(p, r), n) != 1 {
                continue;
            }
            let canon = units
                .iter()
                .map(|u| ((p * u) % n, (r * u) % n))
                .min()
                .expect("unit");
            seen.insert(canon);
        }
    }
    seen.into_iter().collect()
}

/// A matrix in SL₂(ℤ) whose first column is congruent to (p, r) mod N.
fn lift_column(p: i64, r: i64, level: u64) -> Mat2 {
    let n = level as i64;
    let r1 = if r == 0 { n } else { r };
    let p1 = (0..)
        .map(|j| p + j * n)
        .find(|&x| gcd(x, r1) == 1)
        .expect("coprime lift");
    let e = p1.extended_gcd(&r1);
    // e.x p1 + e.y r1 = 1, so [[p1, −e.y], [r1, e.x]] has determinant 1
    [[p1, -e.y], [r1, e.x]]
}

/// Reduced positive definite forms of discriminant D < 0, primitive or not.
pub fn reduced_forms(d: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    let bound = ((-d) as f64 / 3.0).sqrt() as i64 + 1;
    for a in 1..=bound {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            out.push(QuadForm::new(a, b, c));
        }
    }
    out
}

fn check_negative_discriminant(d: i64) -> Result<()> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::Domain(format!(
            "Heegner classes need a negative discriminant, got {d}"
        )));
    }
    Ok(())
}

fn finish_classes(
    mut reps: Vec<QuadForm>,
    level: u64,
    residue: Option<i64>,
) -> Result<Vec<HeegnerClass>> {
    let modulus = 2 * level as i64;
    if let Some(h) = residue {
        reps.retain(|q| (q.b - h).rem_euclid(modulus) == 0);
    }
    let mut out = reps
        .into_iter()
        .map(|q| {
            Ok(HeegnerClass {
                representative: q,
                stabilizer_order: stabilizer_order(&q, level)?,
                point: q.heegner_point()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|c| c.representative);
    Ok(out)
}

fn dedupe(candidates: Vec<QuadForm>, level: u64) -> Result<Vec<QuadForm>> {
    let mut reps: Vec<QuadForm> = Vec::new();
    for q in candidates {
        let mut fresh = true;
        for r in &reps {
            if gamma0_equivalent(&q, r, level)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            reps.push(q);
        }
    }
    Ok(reps)
}

/// Shift b into (−a, a] by a translation, which lies in Γ₀(N).
fn normalize_translation(q: &QuadForm) -> QuadForm {
    let n = Integer::div_floor(&(q.a - q.b), &(2 * q.a));
    q.act(&[[1, n], [0, 1]])
}

/// The Γ₀(N)-classes of positive definite forms [a, b, c] of discriminant D
/// with N | a (and b ≡ h mod 2N when a residue is given). Each SL₂(ℤ)-class
/// is split along the cosets SL₂(ℤ)/Γ₀(N), indexed by P¹(ℤ/N).
pub fn enumerate_heegner_classes(
    level: u64,
    d: i64,
    residue: Option<i64>,
) -> Result<Vec<HeegnerClass>> {
    check_negative_discriminant(d)?;
    if level == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    let n = level as i64;
    let line = projective_line(level);
    let mut candidates = Vec::new();
    for r in reduced_forms(d) {
        for &(p, s) in &line {
            if r.eval(p, s).rem_euclid(n) != 0 {
                continue;
            }
            let g = lift_column(p, s, level);
            candidates.push(normalize_translation(&r.act(&g)));
        }
    }
    candidates.sort();
    finish_classes(dedupe(candidates, level)?, level, residue)
}

/// The same class list from all forms with N | a ≤ a_bound and b mod 2a,
/// deduplicated by Γ₀(N)-equivalence. Complete once a_bound is large enough.
pub fn enumerate_heegner_classes_bounded(
    level: u64,
    d: i64,
    residue: Option<i64>,
    a_bound: i64,
) -> Result<Vec<HeegnerClass>> {
    check_negative_discriminant(d)?;
    let n = level as i64;
    let mut candidates = Vec::new();
    for a in (n..=a_bound).step_by(n as usize) {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                candidates.push(QuadForm::new(a, b, num / (4 * a)));
            }
        }
    }
    finish_classes(dedupe(candidates, level)?, level, residue)
}

/// Candidate bound N·⌈√(|D|/3)⌉ + N for the bounded enumeration.
pub fn default_class_bound(level: u64, d: i64) -> i64 {
    let n = level as i64;
    n * (((-d) as f64 / 3.0).sqrt().ceil() as i64) + n
}

/// #{b mod 2a : b² ≡ D mod 4a}, by exhaustive scan.
pub fn sqrt_count(a: u64, d: i64) -> u64 {
    let modulus = 4 * a as i128;
    let target = (d as i128).rem_euclid(modulus);
    (0..2 * a as i128)
        .filter(|b| (b * b) % modulus == target)
        .count() as u64
}

fn prime_power_root_cache() -> &'static Mutex<HashMap<(u64, i64), u64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, i64), u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// #{x mod p^f : x² ≡ D mod p^f}.
fn roots_mod_prime_power(p: u64, f: u32, d: i64) -> u64 {
    let m = p.pow(f);
    let target = d.rem_euclid(m as i64);
    if p != 2 && target % p as i64 != 0 {
        return (1 + kronecker_symbol(target, p as i64)) as u64;
    }
    if let Some(v) = prime_power_root_cache()
        .lock()
        .expect("cache lock")
        .get(&(m, target))
    {
        return *v;
    }
    let m128 = m as i128;
    let count = (0..m128)
        .filter(|x| (x * x) % m128 == target as i128)
        .count() as u64;
    prime_power_root_cache()
        .lock()
        .expect("cache lock")
        .insert((m, target), count);
    count
}

/// [`sqrt_count`] through the Chinese remainder theorem on 4a.
pub fn sqrt_count_fast(a: u64, d: i64) -> u64 {
    let total: u64 = factorize(4 * a)
        .into_iter()
        .map(|(p, f)| roots_mod_prime_power(p, f, d))
        .product();
    total / 2
}

/// A truncated real series with an estimate of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedReal {
    pub value: f64,
    pub tail_estimate: f64,
}

/// (−1)^k √π Γ(k)/(2^{2k−2}Γ(k+1/2)).
pub fn unfolding_prefactor(k: u32) -> f64 {
    let kf = k as f64;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * std::f64::consts::PI.sqrt() * gamma(kf) / (2f64.powf(2.0 * kf - 2.0) * gamma(kf + 0.5))
}

/// The unfolded real quadratic trace
/// D^{k−1/2}(−1)^k √π Γ(k)/(2^{2k−2}Γ(k+1/2)) Σ_{N|a ≤ a_max} sqrt_count(a, D)/a^k.
/// The tail estimate bounds Σ_{a > a_max} 2d(a)/a^k by an integral.
pub fn real_trace_unfolded(
    k: u32,
    level: u64,
    d: i64,
    cfg: &TruncationConfig,
) -> Result<TruncatedReal> {
    if k < 2 {
        return Err(Error::Domain(format!("real traces need k >= 2, got {k}")));
    }
    if d <= 0 {
        return Err(Error::Domain(format!("real traces need D > 0, got {d}")));
    }
    if level == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    let front = (d as f64).powf(k as f64 - 0.5) * unfolding_prefactor(k);
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Ok(TruncatedReal {
            value: 0.0,
            tail_estimate: 0.0,
        });
    }
    let terms: Vec<f64> = (1..=cfg.a_max / level)
        .into_par_iter()
        .map(|j| {
            let a = j * level;
            sqrt_count_fast(a, d) as f64 / (a as f64).powi(k as i32)
        })
        .collect();
    let sum: f64 = terms.into_iter().sum();
    let big_a = cfg.a_max.max(2) as f64;
    let km1 = k as f64 - 1.0;
    let tail = 2.0 * big_a.powf(-km1) * (big_a.ln() / km1 + 1.0 / (km1 * km1));
    Ok(TruncatedReal {
        value: front * sum,
        tail_estimate: front.abs() * tail,
    })
}

/// Σ over Γ₀(N)-classes of discriminant D < 0 of 𝓕_{0,N}(τ_Q, k)/|Γ₀(N)_Q|.
/// With `include_negative` the negative definite mirror classes are counted too.
pub fn imag_trace(
    k: u32,
    level: u64,
    d: i64,
    include_negative: bool,
    cfg: &TruncationConfig,
) -> Result<TruncatedReal> {
    let classes = enumerate_heegner_classes(level, d, None)?;
    let mut value = 0.0;
    let mut tail = 0.0;
    for class in &classes {
        let f = eval_f0(level, k, class.point, cfg)?;
        value += f.value / class.stabilizer_order as f64;
        tail += f.tail_estimate / class.stabilizer_order as f64;
    }
    let mult = if include_negative { 2.0 } else { 1.0 };
    Ok(TruncatedReal {
        value: mult * value,
        tail_estimate: mult * tail,
    })
}

/// The least positive (t, u) with t² − Du² = 4, found by scanning u.
pub fn pell_automorph(d: i64) -> Result<(i64, i64)> {
    if d <= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::Domain(format!(
            "pell_automorph needs a positive discriminant, got {d}"
        )));
    }
    let root = (d as f64).sqrt().round() as i64;
    if root * root == d {
        return Err(Error::Domain(format!(
            "pell_automorph needs a non-square discriminant, got {d}"
        )));
    }
    for u in 1..=10_000_000i64 {
        let t2 = d as i128 * (u as i128) * (u as i128) + 4;
        let t = (t2 as f64).sqrt().round() as i128;
        for cand in [t - 1, t, t + 1] {
            if cand > 0 && cand * cand == t2 {
                return Ok((cand as i64, u));
            }
        }
    }
    Err(Error::Domain(format!(
        "no Pell solution for D = {d} within the scan range"
    )))
}

/// The automorph [[(t − bu)/2, −cu], [au, (t + bu)/2]] of Q built from (t, u).
pub fn form_automorph(q: &QuadForm, t: i64, u: i64) -> Mat2 {
    [[(t - q.b * u) / 2, -q.c * u], [q.a * u, (t + q.b * u) / 2]]
}

/// Whether gcd(a, b, c) = 1.
pub fn is_primitive(q: &QuadForm) -> bool {
    gcd_u(
        gcd_u(q.a.unsigned_abs(), q.b.unsigned_abs()),
        q.c.unsigned_abs(),
    ) == 1
}
