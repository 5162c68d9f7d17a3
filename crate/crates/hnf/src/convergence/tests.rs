use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::arithmetic::{BoundClass, SequenceSpec};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn zero_start_stays_zero() {
    let run = majorant_run(&MajorantParams::new(2.0, 1.75, StartMode::Value(0.0), 20)).unwrap();
    assert!(run.ln_z.iter().chain(&run.ln_y).chain(&run.ln_x).all(|v| *v == f64::NEG_INFINITY));
    assert!(run.closed_form.holds);
}

#[test]
fn closed_form_matches_recursion() {
    let p = MajorantParams::new(1.0, 1.75, StartMode::Scaled(0.9), 40);
    let run = majorant_run(&p).unwrap();
    assert!(run.closed_form.holds, "error {}", run.closed_form_error);
    assert!(run.closed_form_error < 1e-12);
    assert!(run.condition_c && run.decrease.holds);
    assert!(run.divergence.is_none());

    let run = majorant_run(&MajorantParams::new(3.0, 1.6, StartMode::Scaled(0.5), 60)).unwrap();
    assert!(run.closed_form.holds && run.decrease.holds);
}

#[test]
fn threshold_start_decreases() {
    for kappa in [1.55, 1.75, 1.95] {
        let run = majorant_run(&MajorantParams::new(1.5, kappa, StartMode::Threshold, 40)).unwrap();
        assert!(run.condition_c, "κ = {kappa}");
        assert!(run.decrease.holds, "κ = {kappa}: {:?}", run.decrease);
        assert!(run.x_below_y.holds);
    }
}

#[test]
fn above_threshold_diverges() {
    let run = majorant_run(&MajorantParams::new(1.0, 1.75, StartMode::Scaled(1.5), 40)).unwrap();
    assert!(!run.condition_c);
    let n = run.divergence.expect("z_n should pass 1");
    assert!(run.ln_z[n] > 0.0 && run.ln_z[n] > run.ln_z[n - 1]);
}

#[test]
fn y_lower_bound_at_the_threshold() {
    // y_0 = R^{−2}e^{−1/(2−κ)} < e^{−2} because 1/(2−κ) > 2 on (3/2, 2).
    let run = majorant_run(&MajorantParams::new(1.0, 1.75, StartMode::Threshold, 40)).unwrap();
    assert!(run.y_started_at_threshold);
    assert_eq!(run.y_lower_bound.first_failure, Some(0));
    assert!((run.ln_y[0] + 4.0).abs() < 1e-15);
}

#[test]
fn beta_and_gamma() {
    let k = 1.75;
    let bound = 1.0 / (2.0 - k);
    let g: Vec<f64> = (0..50).map(|n| gamma_n(k, n)).collect();
    assert_eq!(g[0], 0.0);
    assert!(g.windows(2).all(|w| w[1] > w[0]) && g.iter().all(|&x| x < bound));
    // β_n = 2^{n−1} Σ_{k<n} (κ/2)^k = 2^n γ_n / 2 · (2−κ)/(1−κ/2).
    for n in 0..30 {
        let direct: f64 = (n as f64 - 1.0).exp2() * (0..n).map(|j| (k / 2.0f64).powi(j as i32)).sum::<f64>();
        assert!((beta_n(k, n) - direct).abs() <= 1e-12 * direct.max(1.0));
        assert!((beta_n(k, n) - (n as f64).exp2() * g[n]).abs() <= 1e-9 * beta_n(k, n).max(1.0));
    }
}

#[test]
fn majorant_rejects_bad_parameters() {
    for p in [
        MajorantParams::new(1.0, 1.5, StartMode::Threshold, 10),
        MajorantParams::new(1.0, 2.0, StartMode::Threshold, 10),
        MajorantParams::new(0.5, 1.75, StartMode::Threshold, 10),
        MajorantParams::new(1.0, 1.75, StartMode::Threshold, 61).with_bits(53),
        MajorantParams::new(1.0, 1.75, StartMode::Value(-1.0), 10),
    ] {
        assert!(matches!(majorant_run(&p), Err(ConvergenceError::Range(_))), "{p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn majorant_comparisons(r in 1.0f64..4.0, kappa in 1.51f64..1.99, scale in 0.01f64..1.0) {
        let run = majorant_run(&MajorantParams::new(r, kappa, StartMode::Scaled(scale), 40)).unwrap();
        prop_assert!(run.x_below_y.holds);
        prop_assert!(run.y_below_z.holds);
        prop_assert!(run.closed_form.holds);
        prop_assert!(run.decrease.holds);
    }

    #[test]
    fn y_below_z_while_the_lower_bound_holds(kappa in 1.51f64..1.99, y0 in 0.2f64..0.5) {
        // y_0 ≥ e^{−2} makes the inductive hypothesis true at n = 0.
        let run = majorant_run(&MajorantParams::new(1.0, kappa, StartMode::Value(y0), 30)).unwrap();
        prop_assert!(run.y_below_z.holds);
    }
}

fn classes() -> (BoundClass, BoundClass, BoundClass) {
    (
        BoundClass::new(1.0, 1.0, 1.0, 1.0).unwrap(),
        BoundClass::new(1.0, 1.0, 0.0, 0.0).unwrap(),
        BoundClass::new(1.0, 1.0, 0.0, 0.0).unwrap(),
    )
}

fn setting() -> BudgetSetting {
    BudgetSetting { a: SequenceSpec::Geometric(0.5), s0: 0.5, kappa: 1.75, a0_norm: 0.5, b0_norm: 1e-6 }
}

#[test]
fn absorbed_budget_passes_uniformly() {
    let (j, tau, sigma) = classes();
    let short = EstimateBudget::absorbed(j, tau, sigma, &setting(), 1.0, 30).unwrap();
    let r = budget_check(&short, &setting()).unwrap().required_r;
    assert!(r.is_finite() && r >= 1.0);
    // The R that works for n ≤ 30 keeps working much further out.
    let long = EstimateBudget::absorbed(j, tau, sigma, &setting(), r * (1.0 + 1e-12), 60).unwrap();
    let mut s = setting();
    s.b0_norm = 0.5 * long.r.powi(-2) * (-1.0 / (2.0 - s.kappa)).exp();
    let report = budget_check(&long, &s).unwrap();
    assert_eq!(report.first_failure, None, "{:?}", report.inequalities);
    assert!(report.one_implied_by_four);
    assert!(report.all_pass());
}

#[test]
fn no_shrink_fails_early() {
    let (j, tau, sigma) = classes();
    let budget = EstimateBudget::new(j, tau, sigma, vec![0.0; 11], 1.0, 10).unwrap();
    let report = budget_check(&budget, &setting()).unwrap();
    let five = report.inequalities.iter().find(|i| i.name == "5").unwrap();
    assert_eq!(five.first_failure, Some(0));
    assert!(report.first_failure.is_some());
}

#[test]
fn budget_conditions_on_b0() {
    let (j, tau, sigma) = classes();
    let budget = EstimateBudget::absorbed(j, tau, sigma, &setting(), 2.0, 5).unwrap();
    let mut s = setting();
    s.b0_norm = 0.25f64 * (-3.0f64).exp();
    let report = budget_check(&budget, &s).unwrap();
    // 1/(2−κ) = 4: strict (c) needs |B_0| ≤ e^{−4}/4, the weak sign e^{4}/4.
    assert!(report.b && !report.c && report.c_weak);
    assert!(EstimateBudget::new(BoundClass::new(1.0, 0.0, 0.0, 0.0).unwrap(), tau, sigma, vec![-1.0; 3], 1.0, 2).is_err());
}

#[test]
fn arnold_moser_monomials_are_extremal() {
    for (d, n) in [(1usize, 0u32), (1, 3), (2, 4), (3, 2)] {
        let mut e = vec![0u32; d];
        e[0] = n;
        let f = RationalPoly { dim: d, terms: vec![(e, q(3, 1), q(-1, 2))] };
        let r = arnold_moser_check(&f, n, &q(1, 1), &q(1, 2)).unwrap();
        assert!(r.equality && r.pass, "d = {d}, N = {n}");
        assert!((r.lhs / r.rhs - 1.0).abs() < 1e-12);
    }
    let zero = RationalPoly { dim: 2, terms: vec![] };
    let r = arnold_moser_check(&zero, 3, &q(1, 1), &q(1, 2)).unwrap();
    assert!(r.pass && r.equality && r.lhs == 0.0);
}

#[test]
fn arnold_moser_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let terms = (0..rng.gen_range(1..6))
            .map(|_| {
                let a = rng.gen_range(0..4u32);
                let b = rng.gen_range(3u32.saturating_sub(a)..5);
                (vec![a, b], q(rng.gen_range(-9..10), rng.gen_range(1..5)), q(rng.gen_range(-9..10), 3))
            })
            .collect();
        let f = RationalPoly { dim: 2, terms };
        let r = arnold_moser_check(&f, 3, &q(1, 1), &q(1, 2)).unwrap();
        assert!(r.pass);
    }
    let low = RationalPoly { dim: 1, terms: vec![(vec![1], q(1, 1), q(0, 1))] };
    assert_eq!(
        arnold_moser_check(&low, 2, &q(1, 1), &q(1, 2)).unwrap_err(),
        ConvergenceError::OrderMismatch { found: 1, order: 2 }
    );
}

#[test]
fn cauchy_nagumo_examples() {
    let id = DiffOperator { terms: vec![(vec![0], c(1.5))] };
    let f = Poly::monomial(vec![3], c(2.0));
    let r = cauchy_nagumo_check(&id, &f, &[1.0], &[0.5], 2000, 1).unwrap();
    assert!(r.pass && (r.bound - 1.5).abs() < 1e-15);

    let dz = DiffOperator { terms: vec![(vec![1], c(1.0))] };
    for m in 1..8u32 {
        let f = Poly::monomial(vec![m], c(1.0));
        let r = cauchy_nagumo_check(&dz, &f, &[1.0], &[0.5], 500, 2).unwrap();
        // |∂ z^m| on |z| = 1/2 is m 2^{1−m}; |z^m| on |z| = 1 is 1; r = 1/2.
        assert!((r.observed - m as f64 * 2f64.powi(1 - m as i32)).abs() < 1e-12);
        assert_eq!(r.bound, 2.0);
        assert!(r.pass);
    }
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, degree: u32, terms: usize) -> Poly {
    let t = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..degree {
                e[rng.gen_range(0..dim)] += 1;
            }
            (e, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    Poly::new(dim, t).unwrap()
}

#[test]
fn hamiltonian_derivation_on_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..20 {
        let h = random_poly(&mut rng, 4, 3, 6);
        let f = random_poly(&mut rng, 4, 3, 6);
        let r = hamiltonian_derivation_check(&h, &f, &[1.0; 4], &[0.6; 4], 2000, i).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.bound - 4.0 / 0.16).abs() < 1e-12);
    }
}

#[test]
fn borel_examples() {
    let g = PowerSeries::geometric(200);
    let r = borel_check(&g, 0.25, 1.0, 0.5).unwrap();
    assert_eq!(r.x, 0.5);
    assert!((r.rhs - 2.0).abs() < 1e-15 && r.pass);
    let r = borel_check(&PowerSeries::alternating(200), 0.25, 1.0, 0.5).unwrap();
    assert!((r.rhs - 2.0).abs() < 1e-15 && r.pass);

    let r = borel_check(&PowerSeries { coeffs: vec![-3.0, 1.0, 2.0], radius: 1.0 }, 0.0, 1.0, 0.5).unwrap();
    assert_eq!((r.lhs_bound, r.rhs), (3.0, 3.0));

    // |−z²/(1+z)²|(x) = x²/(1−x)² ≤ 4x² for x ≤ 1/2.
    for x in [0.1, 0.3, 0.5] {
        let r = borel_check(&PowerSeries::phi_preimage(400), x, 1.0, 0.0).unwrap();
        assert!(r.pass && r.rhs <= 4.0 * x * x * (1.0 + 1e-12), "x = {x}: {}", r.rhs);
    }
    let r = borel_check(&PowerSeries::psi_preimage(400), 0.5, 1.0, 0.0).unwrap();
    assert!((r.rhs - 1.0).abs() < 1e-12);
    assert!(matches!(borel_check(&g, 1.0, 1.0, 0.5), Err(ConvergenceError::RadiusExceeded { .. })));
}

#[test]
fn local_equivalence_examples() {
    let k = Poly::monomial(vec![0], c(-2.0));
    let r = local_equiv_check(&k, &[1.0], &[0.5], 100, 3).unwrap();
    assert!((r.bound - 4.0).abs() < 1e-12 && (r.observed - 2.0).abs() < 1e-15);

    for m in 0..6u32 {
        let f = Poly::monomial(vec![m], c(1.0));
        let (t, s) = (1.0, 0.7);
        let r = local_equiv_check(&f, &[t], &[s], 200, 4).unwrap();
        let l2 = (std::f64::consts::PI / (m as f64 + 1.0)).sqrt() * t.powi(m as i32 + 1);
        let want = l2 / (std::f64::consts::PI.sqrt() * (t - s));
        assert!((r.bound - want).abs() < 1e-12 && (r.observed - s.powi(m as i32)).abs() < 1e-12);
        assert!(r.pass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100 {
        let f = random_poly(&mut rng, 2, 2, 4);
        let r = local_equiv_check(&f, &[1.0, 1.0], &[0.5, 0.5], 10_000, i).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn sampled_sups_grow_with_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_poly(&mut rng, 2, 3, 5);
    let dz = DiffOperator { terms: vec![(vec![1, 0], c(1.0)), (vec![0, 2], c(0.5))] };
    let mut last = 0.0;
    for n in [10, 100, 1000, 10_000] {
        let r = cauchy_nagumo_check(&dz, &f, &[1.0, 1.0], &[0.8, 0.8], n, 9).unwrap();
        assert!(r.observed >= last);
        last = r.observed;
        assert!(r.falsification_only);
    }
}

#[test]
fn gaps() {
    assert_eq!(polydisc_gap(&[1.0, 2.0], &[0.5, 1.9]), 2.0 - 1.9);
    assert_eq!(ball_gap(1.0, 0.25), 0.75);
}
