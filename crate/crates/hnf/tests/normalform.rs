mod common;

use common::oracles::bnf_oracle;
use hnf::normalform::*;
use hnf::sample::{random_problem_series, standard_context};
use hnf::series::GradedSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(d: usize, cutoff: u32, seed: u64, hi: u32) -> NormalFormProblem {
    let ctx = standard_context(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NormalFormProblem::new(random_problem_series(&ctx, &mut rng, cutoff, 3, hi, 3 * d)).unwrap()
}

#[test]
fn bnf_strategies_match_the_brute_force_oracle() {
    for d in 1..=2 {
        for seed in 0..3 {
            let pb = problem(d, 8, 100 + seed, 4);
            let a = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut Ledger::new()).unwrap();
            let b = birkhoff_normal_form(&pb, RemovalStrategy::MonomialAtATime, &mut Ledger::new()).unwrap();
            assert_eq!(a.frequency.bnf, b.frequency.bnf, "d={d} seed={seed}");
            assert_eq!(a.frequency.bnf, bnf_oracle(pb.hamiltonian()), "d={d} seed={seed}");
        }
    }
}

#[test]
fn bnf_of_cubic_d1() {
    // H = 2pq + p³ has no p^a q^a terms up to weight 6 after normalisation.
    let ctx = standard_context(1);
    let w = 6;
    let h = quadratic_part(&ctx, w).add(&GradedSeries::p(&ctx, w, 0).pow(3));
    let pb = NormalFormProblem::new(h).unwrap();
    let r = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut Ledger::new()).unwrap();
    assert_eq!(r.frequency.bnf, bnf_oracle(pb.hamiltonian()));
    assert_eq!(r.frequency.bnf.to_canonical(), "2*tau1");
}

#[test]
fn hnf_structure_and_kam_form() {
    for (d, seed) in [(1, 1), (2, 2), (2, 3)] {
        let pb = problem(d, 10, seed, 4);
        let mut ledger = Ledger::new();
        let mut st = hnf_init(&pb);
        let (mut a, mut b) = (st.a().clone(), st.b().clone());
        for n in 0..3 {
            let kam = hnf_kam_step(&a, &b, n, &mut ledger).unwrap();
            let next = hnf_step(&st, &mut ledger).unwrap();
            let v = &next.derivations()[n];
            if let Some(o) = v.order() {
                assert!(o >= 1 << n);
            }
            assert_eq!(v, &v.order_window(1 << n, 1 << (n + 1)));
            let lo = (1u32 << (n + 1)) + 2;
            assert!(next.f().sub(next.a()).truncate(0, Some(lo)).is_zero());
            let s = next.increments().last().unwrap();
            assert!(in_trivial_part(s), "d={d} seed={seed} n={n} moser={} jet={:?} s={s}", s.is_moser(), s.ideal_jet().1);
            assert_eq!(&kam.a, next.a());
            let diff = kam.b.sub(next.b());
            assert!(diff.is_zero(), "d={d} n={n} diff={diff}");
            a = kam.a;
            b = kam.b;
            st = next;
        }
    }
}

#[test]
fn hnf_reproduces_birkhoff_data() {
    let pb = problem(2, 10, 5, 4);
    let bnf = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut Ledger::new()).unwrap();
    let mut ledger = Ledger::new();
    let mut st = hnf_init(&pb);
    for n in 1..=3usize {
        st = hnf_step(&st, &mut ledger).unwrap();
        if n < 2 {
            continue;
        }
        let bound = (1u32 << n) + 2;
        let sol = omega_eliminate(&st, pb.cutoff()).unwrap();
        let err = sol.energy.sub(&bnf.frequency.bnf).truncate(0, Some(bound));
        assert!(err.is_zero(), "n={n}: {err}");
        // v_n still moves ω at weight 2^n, so ω_n is only pinned down below that.
        for (f, b) in sol.frequency.iter().zip(&bnf.frequency.gradient) {
            let err = f.sub(b).truncate(0, Some(1 << n));
            assert!(err.is_zero(), "n={n}: {err}");
        }
        assert!(frequency_invariance_check(&sol, &bnf.frequency).passed());
    }
}
