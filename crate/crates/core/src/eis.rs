//! Floating point evaluation of Eisenstein series: the weight 0 lattice sum,
//! q-expansions of the holomorphic series, the plus space coefficients of the
//! weight 3/2 − k series, the θ-integral and direct cycle integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::arith::gcd;
use crate::cohen::{holomorphic_eisenstein_coefficients, plus_eisenstein_factor};
use crate::error::{Error, Result};
use crate::kloosterman::{in_plus_space, paired_two_kappa, plus_zeta_closed, plus_zeta_direct};
use crate::qform::{
    form_automorph, mat_inv, mat_mul, mobius_action, pell_automorph, Mat2, QuadForm, TruncatedReal,
    TruncationConfig, IDENTITY,
};

/// Coset plan for Γ_∞\Γ₀(N): pairs (c, d) with N | c, gcd(c, d) = 1, up to sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSumPlan {
    pub level: u64,
    pub bound: u64,
    pub include_identity_coset: bool,
}

impl LatticeSumPlan {
    /// Visit each coset representative (c, d) with c ≤ bound and |d| ≤ bound.
    pub fn sum<F>(&self, f: F) -> f64
    where
        F: Fn(i64, i64) -> f64 + Sync,
    {
        let n = self.level as i64;
        let b = self.bound as i64;
        let rows: Vec<f64> = (1..=b / n)
            .into_par_iter()
            .map(|j| {
                let c = j * n;
                (-b..=b)
                    .filter(|&d| gcd(c, d) == 1)
                    .map(|d| f(c, d))
                    .sum::<f64>()
            })
            .collect();
        let head = if self.include_identity_coset {
            f(0, 1)
        } else {
            0.0
        };
        head + rows.into_iter().sum::<f64>()
    }
}

/// 𝓕_{0,N}(τ, k) = Σ_{γ ∈ Γ_∞\Γ₀(N)} Im(γτ)^k truncated at the lattice bound.
/// τ is first translated into |Re τ| ≤ 1/2; the tail estimate integrates
/// |cτ + d|^{−2k} outside the disc that the truncation box contains.
pub fn eval_f0(
    level: u64,
    k: u32,
    tau: Complex64,
    cfg: &TruncationConfig,
) -> Result<TruncatedReal> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "the weight 0 Eisenstein series diverges for k = {k}"
        )));
    }
    if tau.im <= 0.0 {
        return Err(Error::Domain("τ must lie in the upper half plane".into()));
    }
    if level == 0 {
        return Err(Error::Domain("level must be positive".into()));
    }
    let tau = Complex64::new(tau.re - tau.re.round(), tau.im);
    let y = tau.im;
    let plan = LatticeSumPlan {
        level,
        bound: cfg.lattice_bound,
        include_identity_coset: true,
    };
    let kf = k as f64;
    let sum = plan.sum(|c, d| (tau * c as f64 + d as f64).norm_sqr().powf(-kf));
    let radius = cfg.lattice_bound as f64 * y.min(0.5);
    let tail =
        y.powf(kf) * (PI / (y * level as f64)) * radius.powf(2.0 - 2.0 * kf) / (2.0 * kf - 2.0);
    Ok(TruncatedReal {
        value: y.powf(kf) * sum,
        tail_estimate: tail,
    })
}

/// Partial q-sum of 𝓔_{2k,N} at z with the magnitude of the first omitted
/// term times a geometric factor as tail estimate.
pub fn eval_e2k(level: u64, k: u32, z: Complex64, n_max: u64) -> Result<(Complex64, f64)> {
    if z.im <= 0.0 {
        return Err(Error::Domain("z must lie in the upper half plane".into()));
    }
    let coeffs: Vec<f64> = {
        let s = holomorphic_eisenstein_coefficients(k, level, n_max)?;
        (0..=n_max).map(|n| s.coefficient(n).to_f64()).collect()
    };
    Ok(sum_q_series(&coeffs, z, k))
}

fn sum_q_series(coeffs: &[f64], z: Complex64, k: u32) -> (Complex64, f64) {
    let q = Complex64::from_polar((-2.0 * PI * z.im).exp(), 2.0 * PI * z.re);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for c in coeffs {
        acc += qn * *c;
        qn *= q;
    }
    let n = coeffs.len() as f64;
    let last = coeffs.last().map(|c| c.abs()).unwrap_or(0.0).max(1.0);
    let r = q.norm();
    let growth = ((n + 1.0) / n.max(1.0)).powf(2.0 * k as f64 - 1.0);
    let tail = if r < 1.0 {
        last * growth * r.powf(n) / (1.0 - r * growth).max(1e-300)
    } else {
        f64::INFINITY
    };
    (acc, tail)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn composite_gauss<F>(f: F, lo: f64, hi: f64, panels: usize, rule: &[(f64, f64)]) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let h = (hi - lo) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in rule {
            acc += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

const PATCH: f64 = 1e-3;

/// ∫₀^π (e^{2iθ} − 1)^k / sin θ dθ by composite Gauss–Legendre on
/// [δ, π − δ] with the factored form (2i)^k e^{ikθ} sin^{k−1}θ integrated
/// termwise on the end patches of width δ = 10⁻³.
pub fn theta_integral_quadrature(k: u32, n_points: usize) -> Result<Complex64> {
    if k < 1 {
        return Err(Error::Domain("the θ-integral needs k >= 1".into()));
    }
    let rule = gauss_legendre(20);
    let kf = k as f64;
    let raw = |t: f64| {
        let w = Complex64::from_polar(1.0, 2.0 * t) - 1.0;
        w.powu(k) / t.sin()
    };
    let factored = |t: f64| {
        Complex64::new(0.0, 2.0).powu(k)
            * Complex64::from_polar(1.0, kf * t)
            * t.sin().powi(k as i32 - 1)
    };
    let panels = n_points.max(1);
    let middle = composite_gauss(raw, PATCH, PI - PATCH, panels, &rule);
    let ends = composite_gauss(factored, 0.0, PATCH, 1, &rule)
        + composite_gauss(factored, PI - PATCH, PI, 1, &rule);
    Ok(middle + ends)
}

/// The closed form 2(−1)^k √π Γ(k)/Γ(k + 1/2) of the θ-integral.
pub fn theta_integral_closed(k: u32) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 * sign * PI.sqrt() * gamma(k as f64) / gamma(k as f64 + 0.5)
}

/// Γ(s, x) for x > 0. Positive s uses the regularized upper incomplete gamma;
/// negative non-integer s steps down with Γ(s, x) = (Γ(s+1, x) − x^s e^{−x})/s.
pub fn incomplete_gamma_upper(s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "incomplete gamma needs x > 0, got {x}"
        )));
    }
    if s > 0.0 {
        return Ok(gamma_ur(s, x) * gamma(s));
    }
    if s == s.floor() {
        return Err(Error::Domain(format!(
            "incomplete gamma at non-positive integer s = {s} is not supported"
        )));
    }
    let steps = (-s).ceil() as u32;
    let mut value = gamma_ur(s + steps as f64, x) * gamma(s + steps as f64);
    for i in (0..steps).rev() {
        let t = s + i as f64;
        value = (value - x.powf(t) * (-x).exp()) / t;
    }
    Ok(value)
}

/// Which plus space zeta evaluation backs [`f_plus_coefficient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaMode {
    Closed,
    Direct { c_max: u64 },
}

/// A Fourier coefficient of 𝓕⁺_{3/2−k,4N} with the tail bound of its zeta value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlusCoefficient {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// The coefficient of qⁿ in 𝓕⁺_{3/2−k,4N}: (2/3)(i/2)^{k−3/2}π 𝒦⁺(0, n; k + 1/2)
/// for n ≥ 0 (holomorphic part), the same divided by Γ(k − 1/2) for n < 0, and 0
/// off the plus space.
pub fn f_plus_coefficient(k: u32, level: u64, n: i64, mode: ZetaMode) -> Result<PlusCoefficient> {
    let two_kappa = paired_two_kappa(k);
    if n != 0 && !in_plus_space(two_kappa, n) {
        return Ok(PlusCoefficient {
            value: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
        });
    }
    let (zeta, tail) = match mode {
        ZetaMode::Closed => (plus_zeta_closed(k, level, n)?, 0.0),
        ZetaMode::Direct { c_max } => {
            let t = plus_zeta_direct(two_kappa, level, n, k, c_max)?;
            (t.value, t.tail_bound)
        }
    };
    let mut factor = plus_eisenstein_factor(k);
    if n < 0 {
        factor /= gamma(k as f64 - 0.5);
    }
    Ok(PlusCoefficient {
        value: factor * zeta,
        tail_bound: factor.norm() * tail,
    })
}

/// ∫ f(z) Q(z, 1)^{k−1} dz along S_Q parametrized by z = −b/(2a) + (√D/(2|a|))e^{iθ},
/// θ running from θ₀ to θ₁.
pub fn geodesic_integral<F>(
    q: &QuadForm,
    k: u32,
    f: F,
    theta0: f64,
    theta1: f64,
    panels: usize,
) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let d = q.discriminant() as f64;
    let center = -(q.b as f64) / (2.0 * q.a as f64);
    let radius = d.sqrt() / (2.0 * (q.a as f64).abs());
    let rule = gauss_legendre(20);
    let integrand = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        let z = center + e * radius;
        let qz = z * z * q.a as f64 + z * q.b as f64 + q.c as f64;
        f(z) * qz.powu(k - 1) * (Complex64::new(0.0, radius) * e)
    };
    composite_gauss(integrand, theta0, theta1, panels, &rule)
}

fn mat_pow(g: &Mat2, e: u32) -> Mat2 {
    (0..e).fold(IDENTITY, |acc, _| mat_mul(&acc, g))
}

/// ∫_{Γ₀(N)_Q\S_Q} 𝓔_{2k,N}(z) Q(z, 1)^{k−1} dz for a primitive form of positive
/// non-square discriminant, integrating from the point at angle `base_theta`
/// (default π/2) to its image under the generator of Γ₀(N)_Q, oriented by sgn(a).
pub fn cycle_integral_direct(
    k: u32,
    level: u64,
    q: &QuadForm,
    base_theta: Option<f64>,
    cfg: &TruncationConfig,
) -> Result<Complex64> {
    let d = q.discriminant();
    let (t, u) = pell_automorph(d)?;
    if q.content().abs() != 1 {
        return Err(Error::Domain(format!(
            "cycle integrals need a primitive form, got {q:?}"
        )));
    }
    if q.a % level as i64 != 0 {
        return Err(Error::Domain(format!("form {q:?} is not in level {level}")));
    }
    let base = form_automorph(q, t, u);
    let n = level as i64;
    let mut g = base;
    let mut e = 1;
    while g[1][0] % n != 0 {
        e += 1;
        g = mat_pow(&base, e);
    }
    let center = -(q.b as f64) / (2.0 * q.a as f64);
    let radius = (d as f64).sqrt() / (2.0 * (q.a as f64).abs());
    let theta0 = base_theta.unwrap_or(PI / 2.0);
    let z0 = center + Complex64::from_polar(radius, theta0);
    let mut theta1 = (mobius_action(&g, z0) - center).arg();
    if theta1 < theta0 {
        g = mat_inv(&g);
        theta1 = (mobius_action(&g, z0) - center).arg();
    }
    let min_im = radius * theta0.sin().min(theta1.sin());
    let r = (-2.0 * PI * min_im).exp();
    let mut n_max = 10u64;
    while (n_max as f64).powf(2.0 * k as f64 - 1.0) * 1e3 * r.powf(n_max as f64) > 1e-16
        && n_max < 20_000
    {
        n_max += 10;
    }
    let s = holomorphic_eisenstein_coefficients(k, level, n_max)?;
    let coeffs: Vec<f64> = (0..=n_max).map(|i| s.coefficient(i).to_f64()).collect();
    let panels = (cfg.lattice_bound as usize / 10).clamp(32, 400);
    let value = geodesic_integral(
        q,
        k,
        |z| sum_q_series(&coeffs, z, k).0,
        theta0,
        theta1,
        panels,
    );
    Ok(if q.a > 0 { value } else { -value })
}
