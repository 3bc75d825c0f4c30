use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;

use crate::arith::*;
use crate::cohen::{hurwitz_class_number, QSeries};
use crate::kloosterman::*;
use crate::qform::*;
use crate::rational::*;
use crate::verify::{format_value, parse_value};

fn squarefree_odd_level() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![1u64, 3, 5, 7, 11, 15, 21, 33, 35])
}

fn plus_disc() -> impl Strategy<Value = i64> {
    (1i64..400).prop_filter("discriminant", |d| matches!(d % 4, 0 | 1))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn rationals_stay_reduced(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
        let x = Rational::new(a, b);
        let y = Rational::new(c, d);
        for r in [x.clone() + y.clone(), x.clone() - y.clone(), x.clone() * y.clone()] {
            prop_assert!(is_reduced(&r));
        }
        if !y.is_zero() {
            prop_assert!(is_reduced(&(x / y)));
        }
    }

    #[test]
    fn rational_text_round_trip(a in any::<i64>(), b in 1i64..i64::MAX) {
        let r = Rational::new(a, b);
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
    }

    #[test]
    fn kronecker_is_multiplicative(a in -500i64..500, m in 1i64..200, n in 1i64..200) {
        prop_assert_eq!(kronecker_symbol(a, m * n), kronecker_symbol(a, m) * kronecker_symbol(a, n));
    }

    #[test]
    fn level_sieve(level in (1u64..=105).prop_filter("squarefree", |&n| is_squarefree(n)), c in 1i64..=500) {
        let s: i64 = divisors(level).into_iter().map(|d| moebius(d) * kronecker_symbol(d as i64, c).pow(2)).sum();
        prop_assert_eq!(s, if c % level as i64 == 0 { 1 } else { 0 });
    }

    #[test]
    fn fundamental_decomposition_round_trip(k in 1u32..6, n in 1u64..5000) {
        if let Some(FundamentalDecomposition { t, m }) = fundamental_decomposition(k, n) {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(t * (m * m) as i64, sign * n as i64);
            prop_assert!(is_fundamental(t));
        }
    }

    #[test]
    fn divisor_sigma_matches_enumeration(s in -3i32..5, r in 1u64..10_000) {
        let naive: Rational = (1..=r).filter(|d| r % d == 0).map(|d| Rational::int_pow(d as i64, s)).sum();
        prop_assert_eq!(divisor_sigma(1, 1, s, r).unwrap(), naive);
    }

    #[test]
    fn kloosterman_weight_period(tk in prop::sample::select(vec![-3i64, -1, 1, 3, 5]), m in -20i64..=20, n in -20i64..=20, c in 1u64..=100) {
        let c = 4 * c;
        prop_assert_eq!(half_integral_kloosterman(tk + 4, m, n, c).unwrap(), half_integral_kloosterman(tk, m, n, c).unwrap());
    }

    #[test]
    fn kloosterman_reflection(tk in prop::sample::select(vec![1i64, 3, 5, 7]), m in -20i64..=20, n in -20i64..=20, c in 1u64..=200) {
        let c = 4 * c;
        let sign = if ((tk - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let k = half_integral_kloosterman(tk, m, n, c).unwrap();
        let r1 = Complex64::new(0.0, sign) * half_integral_kloosterman(4 - tk, -n, -m, c).unwrap();
        let r2 = Complex64::new(0.0, sign) * half_integral_kloosterman(4 - tk, -m, -n, c).unwrap();
        prop_assert!((k - r1).norm() < 1e-9 && (k - r2).norm() < 1e-9);
    }

    #[test]
    fn fast_m0_kloosterman_matches_direct(tk in prop::sample::select(vec![1i64, 3]), n in -60i64..=60, c in 1u64..=150) {
        let c = 4 * c;
        let fast = half_integral_kloosterman_m0(tk, n, c).unwrap();
        let slow = half_integral_kloosterman(tk, 0, n, c).unwrap();
        prop_assert!((fast - slow).norm() < 1e-9);
    }

    #[test]
    fn local_sums_truncate(p in prop::sample::select(vec![2u64, 3, 5, 7]), tk in prop::sample::select(vec![1i64, 3]), n in (-400i64..400).prop_filter("nonzero", |&n| n != 0)) {
        let start = valuation(p, n) + if p == 2 { 4 } else { 2 };
        for j in start..start + 2 {
            prop_assert!(local_factor_direct(tk, p, j, n).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn local_series_matches_closed(p in prop::sample::select(vec![2u64, 3, 5, 7]), k in 2u32..=4, n in (-2000i64..2000).prop_filter("nonzero", |&n| n != 0)) {
        prop_assume!(valuation(p, n) <= 4);
        let series = local_factor_series(paired_two_kappa(k), k, p, n).unwrap();
        let closed = local_factor_closed(k, p, -n).unwrap().conj();
        prop_assert!((series - closed).norm() < 1e-10);
    }

    #[test]
    fn plus_zeta_closed_and_local_agree(k in 2u32..=5, level in squarefree_odd_level(), n in -200i64..200) {
        let a = plus_zeta_closed(k, level, n).unwrap();
        let b = plus_zeta_local(paired_two_kappa(k), k, level, n).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn class_numbers_respect_support(k in 2u32..=5, level in squarefree_odd_level(), n in 1u64..=200) {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        if !matches!((sign * n as i64).rem_euclid(4), 0 | 1) {
            for ell in divisors(level) {
                prop_assert!(hurwitz_class_number(k, ell, level, n).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn heegner_points_are_roots(level in prop::sample::select(vec![1u64, 2, 3, 5, 6, 7]), d in 3i64..150) {
        prop_assume!(matches!((-d).rem_euclid(4), 0 | 1));
        for class in enumerate_heegner_classes(level, -d, None).unwrap() {
            let q = class.representative;
            prop_assert_eq!(q.a.rem_euclid(level as i64), 0);
            let tau = class.point;
            let value = Complex64::new(q.a as f64, 0.0) * tau * tau + tau * q.b as f64 + q.c as f64;
            prop_assert!(value.norm() < 1e-9 * (q.a.abs() + q.c.abs()) as f64);
            prop_assert!((q.a as f64 * tau.norm_sqr() - q.c as f64).abs() < 1e-9 * q.c.abs() as f64);
        }
    }

    #[test]
    fn equivalence_is_an_equivalence(level in prop::sample::select(vec![1u64, 3, 5]), d in 3i64..80, seeds in prop::array::uniform3((-3i64..=3, -3i64..=3))) {
        prop_assume!(matches!((-d).rem_euclid(4), 0 | 1));
        let reduced = reduced_forms(-d);
        prop_assume!(!reduced.is_empty());
        // Move the first reduced form around by elements of Γ₀(N).
        let forms: Vec<QuadForm> = seeds
            .iter()
            .map(|&(x, y)| {
                let n = level as i64;
                let g1: Mat2 = [[1, x], [0, 1]];
                let g2: Mat2 = [[1, 0], [n * y, 1]];
                reduced[0].act(&mat_mul(&g1, &g2))
            })
            .collect();
        for a in &forms {
            prop_assert!(gamma0_equivalent(a, a, level).unwrap());
            for b in &forms {
                prop_assert_eq!(gamma0_equivalent(a, b, level).unwrap(), gamma0_equivalent(b, a, level).unwrap());
                prop_assert!(gamma0_equivalent(a, b, level).unwrap());
            }
        }
        let other = reduced[reduced.len() - 1];
        let ab = gamma0_equivalent(&forms[0], &other, level).unwrap();
        let bc = gamma0_equivalent(&other, &forms[1], level).unwrap();
        prop_assert_eq!(ab, bc);
    }

    #[test]
    fn sqrt_count_is_multiplicative(a1 in 1u64..=50, a2 in 1u64..=50, d in plus_disc()) {
        prop_assume!(a1.gcd(&a2) == 1);
        prop_assert_eq!(sqrt_count(a1 * a2, d), sqrt_count(a1, d) * sqrt_count(a2, d));
        prop_assert_eq!(sqrt_count_fast(a1 * a2, d), sqrt_count(a1 * a2, d));
    }

    #[test]
    fn kohnen_identity(a in 1u64..=300, d in prop::sample::select(vec![1i64, 4, 5, 8, 9, 12, 13]), k in 2u32..=5) {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let rhs: f64 = divisors(a).into_iter().map(|c| (c as f64).sqrt() * kohnen_plus_sum(k, sign * d, c).unwrap()).sum();
        prop_assert!((rhs - sqrt_count(a, d) as f64).abs() < 1e-8);
    }

    #[test]
    fn series_text_round_trip(entries in prop::collection::btree_map(0u64..50, (-1000i64..1000, 1i64..1000), 0..20)) {
        let mut s = QSeries::zero(49);
        for (n, (p, q)) in entries {
            s.set(n, Rational::new(p, q));
        }
        prop_assert_eq!(QSeries::from_csv(&s.to_csv()).unwrap(), s.clone());
        prop_assert_eq!(QSeries::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn report_values_round_trip(re in any::<f64>(), im in any::<f64>()) {
        prop_assume!(re.is_finite() && im.is_finite());
        let z = Complex64::new(re, im);
        prop_assert_eq!(parse_value(&format_value(z)).unwrap(), z);
    }
}
