mod common;

use common::oracles::sigma_oracle;
use hnf::arithmetic::*;
use num_complex::Complex64;

const PHI: f64 = 1.618_033_988_749_895;

fn real(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&r| Complex64::new(r, 0.0)).collect()
}

#[test]
fn sigma_matches_exhaustive_enumeration() {
    let cases: [(&[f64], u32); 5] = [
        (&[1.0, PHI], 8),
        (&[0.3, -1.7], 8),
        (&[1.0, 2f64.sqrt()], 8),
        (&[1.0, PHI, PHI * PHI], 6),
        (&[0.25, 3f64.sqrt(), -0.9], 6),
    ];
    let budget = EnumerationBudget::default();
    for (beta, k) in cases {
        for (code, norm) in [(0, LatticeNorm::Linf), (1, LatticeNorm::L1), (2, LatticeNorm::L2)] {
            let got = sigma_sequence(&real(beta), k, norm, &budget).unwrap();
            assert_eq!(got, sigma_oracle(beta, k, code), "β = {beta:?}, {}", norm.name());
        }
    }
}

#[test]
fn density_rises_as_the_ball_shrinks() {
    let beta = [1.0, PHI];
    let a = SequenceSpec::NuSigma { beta: beta.to_vec(), exponent: 4.0 }.terms(6).unwrap();
    let budget = EnumerationBudget::default();
    let runs: Vec<DensityEstimate> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| density_estimate(&beta, &a, eps, 6, 4000, 11, LatticeNorm::Linf, &budget).unwrap())
        .collect();
    assert!(runs.iter().all(|r| r.centre_member));
    for w in runs.windows(2) {
        let slack = 2.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        assert!(w[1].fraction + slack >= w[0].fraction, "{:?} then {:?}", w[0], w[1]);
    }
    assert!(runs[2].fraction > runs[0].fraction || runs[0].fraction == 1.0);
}

#[test]
fn absorption_at_the_documented_settings() {
    let class = BoundClass::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let g = SequenceSpec::Geometric(0.5);
    let r = absorb_rho(&class, &g, &g, 0.5, 30, 128).unwrap();
    assert!(r.holds());
    let steeper = BoundClass::new(3.0, 2.0, 1.5, 2.0).unwrap();
    let b = SequenceSpec::DoubleExp(1.5);
    let r = absorb_rho(&steeper, &g, &b, 0.25, 30, 128).unwrap();
    assert!(r.holds(), "first failure at {:?}", r.first_failure);
}
