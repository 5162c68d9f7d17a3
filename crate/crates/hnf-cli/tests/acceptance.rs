//! Acceptance criteria 1–13, each at its stated size and tolerance.
//!
//! Prints one `PASS`/`FAIL` line per criterion. Parts listed in `KNOWN`
//! are expected to fail (see the README); any other failing part fails
//! the test.

#[path = "../../hnf/tests/common/oracles.rs"]
mod oracles;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hnf::arithmetic::*;
use hnf::convergence::*;
use hnf::normalform::*;
use hnf::sample::{random_problem_series, random_series, standard_context};
use hnf::scalar::{AlphaContext, BaseField, BaseNumber, SmallDenomScalar};
use hnf::series::{GradedSeries, Monomial, PoissonDerivation};
use hnf::tori::{build_normalization, defect_scaling, elliptic_quadratic, EllipticProblem, TorusConfig};

use oracles::{bnf_oracle, sigma_oracle};

const PHI: f64 = 1.618_033_988_749_895;

/// `(criterion, part)` pairs whose failure is documented.
const KNOWN: &[(u32, &str)] = &[(5, "frequency identity to O(2^n+2)"), (10, "y_n >= exp(-2 kappa^n)")];

type Part = (&'static str, Result<(), String>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_problem(d: usize, cutoff: u32, seed: u64) -> NormalFormProblem {
    let ctx = standard_context(d);
    NormalFormProblem::new(random_problem_series(&ctx, &mut rng(seed), cutoff, 3, 4, 3 * d)).unwrap()
}

/// Ten problems, five per dimension, shared by criteria 3–6.
fn structure_instances() -> &'static [NormalFormProblem] {
    static CELL: std::sync::OnceLock<Vec<NormalFormProblem>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| (0..10).map(|k| random_problem(1 + k / 5, 10, 500 + k as u64)).collect())
}

fn c1_exact_algebra() -> Vec<Part> {
    let start = Instant::now();
    let ctx = standard_context(2);
    let w = 8;
    let series = |r: &mut ChaCha8Rng| random_series(&ctx, r, w, 1, 4, 5, true, true);
    let n = 50;

    let jacobi = (0..n).try_for_each(|k| {
        let mut r = rng(1000 + k);
        let (f, g, h) = (series(&mut r), series(&mut r), series(&mut r));
        let s = f.bracket(&g.bracket(&h)).add(&g.bracket(&h.bracket(&f))).add(&h.bracket(&f.bracket(&g)));
        ensure(s.is_zero(), || format!("instance {k}: {s}"))
    });

    let leibniz = (0..n).try_for_each(|k| {
        let mut r = rng(2000 + k);
        let (f, g) = (series(&mut r), series(&mut r));
        let v = PoissonDerivation::new(
            random_series(&ctx, &mut r, w, 3, 4, 3, true, true),
            vec![random_series(&ctx, &mut r, w, 1, 2, 2, true, true), random_series(&ctx, &mut r, w, 1, 2, 2, true, true)],
            vec![random_series(&ctx, &mut r, w, 3, 4, 2, true, true), GradedSeries::zero(&ctx, w)],
        );
        let lhs = v.apply(&f.mul(&g));
        let rhs = v.apply(&f).mul(&g).add(&f.mul(&v.apply(&g)));
        ensure(lhs == rhs, || format!("instance {k}"))
    });

    let order = (0..n).try_for_each(|k| {
        let mut r = rng(3000 + k);
        let (f, g) = (series(&mut r), series(&mut r));
        let b = f.bracket(&g);
        ensure(b.add(&g.bracket(&f)).is_zero(), || format!("instance {k}: not antisymmetric"))?;
        match (f.order(), g.order(), b.order()) {
            (Some(of), Some(og), Some(ob)) => ensure(ob + 2 >= of + og, || format!("instance {k}: {ob} < {of}+{og}-2")),
            _ => Ok(()),
        }
    });

    let h0 = quadratic_part(&ctx, w);
    let field = ctx.field().clone();
    let diagonal = (0..n).try_for_each(|k| {
        let mut r = rng(4000 + k);
        let a: Vec<u16> = (0..2).map(|_| r.gen_range(0..=4)).collect();
        let b: Vec<u16> = (0..2).map(|_| r.gen_range(0..=4)).collect();
        let m = Monomial::new(&a, &b, &[0, 0]);
        let c = hnf::sample::random_scalar(&ctx, &mut r, true);
        let x = GradedSeries::term(&ctx, w, m, c);
        // (α, a − b) summed by hand.
        let mut pairing = BaseNumber::zero(&field);
        for i in 0..2 {
            let diff = BaseNumber::from_i64(&field, i64::from(a[i]) - i64::from(b[i]));
            pairing = &pairing + &(&ctx.alpha()[i] * &diff);
        }
        let want = x.scale_base(&pairing);
        let got = h0.bracket(&x);
        ensure(got == want, || format!("a={a:?} b={b:?}: {got} vs {want}"))
    });
    let elapsed = start.elapsed().as_secs_f64();
    vec![
        ("Jacobi identity", jacobi),
        ("Leibniz rule", leibniz),
        ("bracket order and antisymmetry", order),
        ("{h0, p^a q^b} = (alpha, a-b) p^a q^b", diagonal),
        ("runtime < 60 s", ensure(elapsed < 60.0, || format!("{elapsed:.1} s"))),
    ]
}

fn c2_bnf_uniqueness() -> Vec<Part> {
    let mut agree = Ok(());
    let mut oracle = Ok(());
    for d in 1..=2 {
        for seed in 0..5 {
            let pb = random_problem(d, 8, 700 + seed);
            let a = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut Ledger::new()).unwrap();
            let b = birkhoff_normal_form(&pb, RemovalStrategy::MonomialAtATime, &mut Ledger::new()).unwrap();
            if agree.is_ok() && a.frequency.bnf != b.frequency.bnf {
                agree = Err(format!("d={d} seed={seed}"));
            }
            if oracle.is_ok() && a.frequency.bnf != bnf_oracle(pb.hamiltonian()) {
                oracle = Err(format!("d={d} seed={seed}"));
            }
        }
    }
    vec![("strategies agree", agree), ("matches brute-force oracle", oracle)]
}

struct Structure {
    window: Result<(), String>,
    f_minus_a: Result<(), String>,
    trivial: Result<(), String>,
    kam: Result<(), String>,
}

fn run_structure() -> Structure {
    let mut out = Structure { window: Ok(()), f_minus_a: Ok(()), trivial: Ok(()), kam: Ok(()) };
    for (k, pb) in structure_instances().iter().enumerate() {
        let mut ledger = Ledger::new();
        let mut st = hnf_init(pb);
        let (mut a, mut b) = (st.a().clone(), st.b().clone());
        for n in 0..3usize {
            let kam = hnf_kam_step(&a, &b, n, &mut ledger).unwrap();
            let next = hnf_step(&st, &mut ledger).unwrap();
            let v = &next.derivations()[n];
            let lo = 1u32 << n;
            let fail = |r: &mut Result<(), String>, what: &str| {
                if r.is_ok() {
                    *r = Err(format!("problem {k}, n={n}: {what}"));
                }
            };
            if v.order().is_some_and(|o| o < i64::from(lo)) || v != &v.order_window(lo, 2 * lo) {
                fail(&mut out.window, "order outside [2^n, 2^(n+1))");
            }
            if !next.f().sub(next.a()).truncate(0, Some(2 * lo + 2)).is_zero() {
                fail(&mut out.f_minus_a, "F - A has low-weight terms");
            }
            if !in_trivial_part(next.increments().last().unwrap()) {
                fail(&mut out.trivial, "S_n outside (R0 + I^2) ∩ M");
            }
            if &kam.a != next.a() || &kam.b != next.b() {
                fail(&mut out.kam, "KAM form differs");
            }
            a = kam.a;
            b = kam.b;
            st = next;
        }
    }
    out
}

fn c3_c4() -> (Vec<Part>, Vec<Part>) {
    let s = run_structure();
    (
        vec![
            ("order(v_n) window", s.window),
            ("F_n = A_n + O(2^n+2)", s.f_minus_a),
            ("S_n in (R0 + I^2) ∩ M", s.trivial),
        ],
        vec![("KAM form equals direct form", s.kam)],
    )
}

fn c5_c6() -> (Vec<Part>, Vec<Part>) {
    let (mut energy, mut freq, mut freq_low, mut invariance) = (Ok(()), Ok(()), Ok(()), Ok(()));
    for (k, pb) in structure_instances().iter().enumerate() {
        let bnf = birkhoff_normal_form(pb, RemovalStrategy::DegreeByDegree, &mut Ledger::new()).unwrap();
        let mut ledger = Ledger::new();
        let mut st = hnf_init(pb);
        for n in 1..=3usize {
            st = hnf_step(&st, &mut ledger).unwrap();
            let sol = omega_eliminate(&st, pb.cutoff()).unwrap();
            if !frequency_invariance_check(&sol, &bnf.frequency).passed() && invariance.is_ok() {
                invariance = Err(format!("problem {k}, n={n}"));
            }
            if n < 2 {
                continue;
            }
            let bound = (1u32 << n) + 2;
            let err = sol.energy.sub(&bnf.frequency.bnf).truncate(0, Some(bound));
            if !err.is_zero() && energy.is_ok() {
                energy = Err(format!("problem {k}, n={n}: {err}"));
            }
            for (f, b) in sol.frequency.iter().zip(&bnf.frequency.gradient) {
                let e = f.sub(b);
                if !e.truncate(0, Some(bound)).is_zero() && freq.is_ok() {
                    freq = Err(format!("problem {k}, n={n}: lowest discrepancy at weight {:?}", e.order()));
                }
                if !e.truncate(0, Some(1 << n)).is_zero() && freq_low.is_ok() {
                    freq_low = Err(format!("problem {k}, n={n}"));
                }
            }
        }
    }
    (
        vec![
            ("energy identity h_n = B + O(2^n+2)", energy),
            ("frequency identity to O(2^n+2)", freq),
            ("frequency identity to O(2^n)", freq_low),
        ],
        vec![("tau-coefficients of omega_n in span F(H)", invariance)],
    )
}

fn c7_worked_example() -> Vec<Part> {
    let ctx = standard_context(1);
    let w = 10;
    let pq = GradedSeries::p(&ctx, w, 0).mul(&GradedSeries::q(&ctx, w, 0));
    let pb = NormalFormProblem::new(quadratic_part(&ctx, w).add(&pq.pow(2))).unwrap();
    let mut ledger = Ledger::new();
    let st1 = hnf_step(&hnf_init(&pb), &mut ledger).unwrap();
    let st2 = hnf_step(&st1, &mut ledger).unwrap();
    let f = GradedSeries::f_gen(&ctx, w, 0);
    let tau = GradedSeries::tau(&ctx, w, 0);
    let expect = make_unfolding(&ctx, w).add(&f.mul(&f)).sub(&tau.pow(2));
    let v1_nonzero = st1.next_derivation(&mut ledger).map(|v| !v.is_zero()).unwrap_or(false);
    let v2_zero = st2.next_derivation(&mut ledger).map(|v| v.is_zero()).unwrap_or(false);
    vec![
        ("terminates at n = 2", ensure(v1_nonzero && v2_zero, || format!("v1 nonzero {v1_nonzero}, v2 zero {v2_zero}"))),
        ("F_2 = A_2", ensure(st2.f() == st2.a(), || format!("{} vs {}", st2.f(), st2.a()))),
        ("A_2 = A_0 + f^2 - tau^2", ensure(st2.a() == &expect, || format!("{} vs {expect}", st2.a()))),
    ]
}

fn c8_arithmetic() -> Vec<Part> {
    let budget = EnumerationBudget::default();
    let cases: [(&[f64], u32); 6] = [
        (&[1.0, PHI], 8),
        (&[0.3, -1.7], 8),
        (&[1.0, 2f64.sqrt()], 8),
        (&[1.0, PHI, PHI * PHI], 8),
        (&[0.25, 3f64.sqrt(), -0.9], 6),
        (&[2f64.sqrt()], 8),
    ];
    let sigma = cases.iter().try_for_each(|(beta, k)| {
        [(0u8, LatticeNorm::Linf), (1, LatticeNorm::L1), (2, LatticeNorm::L2)].iter().try_for_each(|(code, norm)| {
            let beta_c: Vec<Complex64> = beta.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let got = sigma_sequence(&beta_c, *k, *norm, &budget).unwrap();
            let want = sigma_oracle(beta, *k, *code);
            ensure(got == want, || format!("beta = {beta:?}, {}: {got:?} vs {want:?}", norm.name()))
        })
    });
    let p = ArithParams::new(vec![1.0, PHI], SequenceSpec::Geometric(0.25), SequenceSpec::DoubleExp(1.5), 0.1, 6)
        .unwrap();
    let shrink = (0..=6).try_for_each(|n| {
        let r = p.shrink_check(n, 1000, 40 + n as u64).unwrap();
        ensure(r.pairs == 1000 && r.violations == 0, || format!("n={n}: {r:?}"))
    });
    vec![("sigma matches exhaustive re-enumeration", sigma), ("Z-shrink lemma on 1000 pairs per n <= 6", shrink)]
}

fn c9_absorption() -> Vec<Part> {
    let mut r = rng(909);
    let result = (0..10).try_for_each(|k| {
        let class = BoundClass::new(
            r.gen_range(0.5..4.0),
            r.gen_range(0.5..2.0),
            r.gen_range(0.0..2.0),
            r.gen_range(0.0..2.0),
        )
        .unwrap();
        let a = SequenceSpec::Geometric(r.gen_range(0.3..0.8));
        let b = if r.gen_bool(0.5) {
            SequenceSpec::DoubleExp(r.gen_range(1.2..1.9))
        } else {
            SequenceSpec::Geometric(r.gen_range(0.3..0.8))
        };
        let s0 = r.gen_range(0.2..1.0);
        let abs = absorb_rho(&class, &a, &b, s0, 30, 128).unwrap();
        ensure(abs.holds() && abs.ratios.len() == 31, || {
            format!("combination {k} ({class:?}, {a}, {b}, s0={s0}): first failure {:?}", abs.first_failure)
        })
    });
    vec![("u_n < K b_n for n <= 30 at 128 bits", result)]
}

fn c10_majorant() -> Vec<Part> {
    let start = Instant::now();
    let mut closed = Ok(());
    let mut decrease = Ok(());
    for (kappa, mode) in [
        (1.75, StartMode::Threshold),
        (1.6, StartMode::Scaled(0.5)),
        (1.9, StartMode::Scaled(0.9)),
        (1.75, StartMode::Value(1e-3)),
    ] {
        let run = majorant_run(&MajorantParams::new(1.0, kappa, mode, 40)).unwrap();
        if closed.is_ok() && !(run.closed_form.holds && run.closed_form_error <= 1e-12) {
            closed = Err(format!("kappa={kappa} {mode:?}: error {}", run.closed_form_error));
        }
        if run.condition_c && !run.decrease.holds && decrease.is_ok() {
            decrease = Err(format!("kappa={kappa} {mode:?}: {:?}", run.decrease));
        }
        if !run.condition_c && decrease.is_ok() {
            decrease = Err(format!("kappa={kappa} {mode:?}: condition (c) should hold at or below threshold"));
        }
    }
    let threshold = majorant_run(&MajorantParams::new(1.0, 1.75, StartMode::Threshold, 40)).unwrap();
    let lower = ensure(threshold.y_lower_bound.holds, || {
        format!("threshold start: first failure at n = {:?}", threshold.y_lower_bound.first_failure)
    });
    let above = majorant_run(&MajorantParams::new(1.0, 1.75, StartMode::Scaled(1.5), 40)).unwrap();
    let diverge = ensure(!above.condition_c && above.divergence.is_some(), || format!("{:?}", above.divergence));
    let elapsed = start.elapsed().as_secs_f64();
    vec![
        ("closed form vs recursion at rel. tol 1e-12", closed),
        ("y_n >= exp(-2 kappa^n)", lower),
        ("monotone decrease under condition (c)", decrease),
        ("divergence detected above threshold", diverge),
        ("runtime < 1 s", ensure(elapsed < 1.0, || format!("{elapsed:.2} s"))),
    ]
}

fn random_poly(r: &mut ChaCha8Rng, dim: usize, degree: u32, terms: usize) -> Poly {
    let t = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..degree {
                e[r.gen_range(0..dim)] += 1;
            }
            (e, Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        })
        .collect();
    Poly::new(dim, t).unwrap()
}

fn c11_lemmas() -> Vec<Part> {
    let (t, s) = (rat(1, 1), rat(1, 2));
    let mono = [(1usize, 0u32), (1, 3), (2, 4), (3, 2), (2, 6)].iter().try_for_each(|&(d, n)| {
        let mut e = vec![0u32; d];
        e[d - 1] = n;
        let f = RationalPoly { dim: d, terms: vec![(e, rat(3, 1), rat(-1, 2))] };
        let r = arnold_moser_check(&f, n, &t, &s).unwrap();
        ensure(r.equality && r.pass, || format!("d={d} N={n}: {r:?}"))
    });
    let mut r = rng(1111);
    let random = (0..100).try_for_each(|k| {
        let terms = (0..r.gen_range(1..6))
            .map(|_| {
                let a = r.gen_range(0..4u32);
                let b = r.gen_range(3u32.saturating_sub(a)..5);
                (vec![a, b], rat(r.gen_range(-9..10), r.gen_range(1..5)), rat(r.gen_range(-9..10), 3))
            })
            .collect();
        let rep = arnold_moser_check(&RationalPoly { dim: 2, terms }, 3, &t, &s).unwrap();
        ensure(rep.pass, || format!("polynomial {k}: {rep:?}"))
    });
    let borel = borel_check(&PowerSeries::geometric(200), 0.25, 1.0, 0.5).unwrap();
    let borel = ensure(borel.pass && (borel.rhs - 2.0).abs() < 1e-15, || format!("{borel:?}"));

    let samples = 10_000;
    let cn = (0..10u64).try_for_each(|k| {
        let op = DiffOperator {
            terms: vec![
                (vec![1, 0], Complex64::new(r.gen_range(-1.0..1.0), 0.3)),
                (vec![1, 1], Complex64::new(0.5, r.gen_range(-1.0..1.0))),
                (vec![0, 2], Complex64::new(r.gen_range(-1.0..1.0), 0.0)),
            ],
        };
        let f = random_poly(&mut r, 2, 4, 5);
        let rep = cauchy_nagumo_check(&op, &f, &[1.0, 1.0], &[0.7, 0.7], samples, k).unwrap();
        ensure(rep.pass && rep.samples == samples, || format!("instance {k}: {rep:?}"))
    });
    let local = (0..10u64).try_for_each(|k| {
        let f = random_poly(&mut r, 2, 2, 4);
        let rep = local_equiv_check(&f, &[1.0, 1.0], &[0.5, 0.5], samples, k).unwrap();
        ensure(rep.pass && rep.samples == samples, || format!("instance {k}: {rep:?}"))
    });
    vec![
        ("Arnold-Moser equality on monomials", mono),
        ("Arnold-Moser inequality on 100 random polynomials", random),
        ("Borel instance 1/(1-1/2) = 2", borel),
        ("Cauchy-Nagumo: no falsification at 10^4 samples", cn),
        ("local equivalence: no falsification at 10^4 samples", local),
    ]
}

fn benchmark() -> EllipticProblem {
    let f = BaseField::sqrt(2).unwrap();
    let ctx: Arc<AlphaContext> = AlphaContext::new(f.clone(), vec![BaseNumber::one(&f), BaseNumber::theta(&f)]);
    let w = 6;
    let q1 = GradedSeries::q(&ctx, w, 0);
    let q2 = GradedSeries::q(&ctx, w, 1);
    let h = elliptic_quadratic(&ctx, w).add(&q1.mul(&q1).mul(&q2).scale(&SmallDenomScalar::constant(
        2,
        BaseNumber::from_rational(&f, rat(1, 20)),
    )));
    EllipticProblem::new(h).unwrap()
}

fn c12_torus() -> Vec<Part> {
    let start = Instant::now();
    let norm = build_normalization(&benchmark(), 6, 3).unwrap();
    let config = TorusConfig::default();
    let s = defect_scaling(&norm, &[0.1, 0.05, 0.025], &[1.0, 1.0], &config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    vec![
        ("T = 100", ensure(config.t_span == 100.0, || format!("{}", config.t_span))),
        ("energy drift < 1e-9", ensure(s.energy_drift < 1e-9, || format!("{:e}", s.energy_drift))),
        (
            "defect slope >= N-2 = 4",
            ensure(s.slope >= 4.0 && s.monotone, || format!("slope {} defects {:?}", s.slope, s.defects)),
        ),
        (
            "frequencies within 10 rho^(N-2)",
            ensure(s.frequency_pass, || format!("{:?} vs {:?}", s.frequency_errors, s.frequency_bounds)),
        ),
        ("runtime < 5 min", ensure(elapsed < 300.0, || format!("{elapsed:.0} s"))),
    ]
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn c13_determinism() -> Vec<Part> {
    let inputs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../inputs");
    let input = |n: &str| inputs.join(n).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["hnf".into(), input("worked_example.txt"), "--steps".into(), "3".into(), "--cutoff".into(), "10".into()],
        vec!["bnf".into(), input("benchmark.txt")],
        vec!["freq".into(), input("mixed_d2.txt"), "--cutoff".into(), "10".into()],
        vec!["arith".into(), "sigma".into(), "--kmax".into(), "8".into()],
        vec!["arith".into(), "zn".into(), "--seed".into(), "3".into()],
        vec!["arith".into(), "density".into(), "--seed".into(), "4".into()],
        vec!["arith".into(), "absorb".into()],
        vec!["majorant".into()],
        vec!["lemmas".into(), "--seed".into(), "5".into()],
        vec![
            "torus".into(),
            input("benchmark.txt"),
            "--rho".into(),
            "0.1,0.05".into(),
            "--trajectories".into(),
            "3".into(),
            "--t-span".into(),
            "20".into(),
            "--dump".into(),
            "--seed".into(),
            "6".into(),
        ],
    ];
    let root = tempfile::tempdir().unwrap();
    let result = runs.iter().enumerate().try_for_each(|(k, args)| {
        let mut outputs = Vec::new();
        for (rep, threads) in ["1", "4"].iter().enumerate() {
            let dir = root.path().join(format!("{k}-{rep}"));
            let ledger = root.path().join(format!("{k}-{rep}.ledger.json"));
            let o = Command::new(env!("CARGO_BIN_EXE_hnf"))
                .args(args)
                .arg("--out")
                .arg(&dir)
                .arg("--ledger")
                .arg(&ledger)
                .env("HNF_THREADS", threads)
                .output()
                .unwrap();
            if o.status.code() == Some(1) {
                return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
            }
            let mut files = tree(&dir);
            files.push(("ledger".into(), fs::read(&ledger).unwrap()));
            outputs.push((o.status.code(), files));
        }
        ensure(outputs[0] == outputs[1], || format!("{args:?} differs between runs"))
    });
    vec![("identical bytes across two runs (1 and 4 threads)", result)]
}

#[test]
fn acceptance_criteria() {
    let (c3, c4) = c3_c4();
    let (c5, c6) = c5_c6();
    let criteria: Vec<(u32, &str, Vec<Part>)> = vec![
        (1, "exact algebra suite", c1_exact_algebra()),
        (2, "BNF uniqueness", c2_bnf_uniqueness()),
        (3, "HNF structure at truncated order", c3),
        (4, "KAM form equals direct form", c4),
        (5, "BNF-HNF consistency", c5),
        (6, "frequency-space invariance", c6),
        (7, "worked example closure", c7_worked_example()),
        (8, "arithmetic", c8_arithmetic()),
        (9, "absorption", c9_absorption()),
        (10, "majorant scalars", c10_majorant()),
        (11, "auxiliary estimates", c11_lemmas()),
        (12, "torus verification", c12_torus()),
        (13, "determinism", c13_determinism()),
    ];
    let mut unexpected = Vec::new();
    for (id, name, parts) in &criteria {
        let failed: Vec<(&str, &String)> =
            parts.iter().filter_map(|(p, r)| r.as_ref().err().map(|e| (*p, e))).collect();
        if failed.is_empty() {
            println!("PASS {id:>2} {name}");
            continue;
        }
        let detail: Vec<String> = failed
            .iter()
            .map(|(p, e)| {
                let known = KNOWN.contains(&(*id, *p));
                if !known {
                    unexpected.push(format!("{id}: {p}: {e}"));
                }
                format!("{p}{}: {e}", if known { " [known]" } else { "" })
            })
            .collect();
        println!("FAIL {id:>2} {name}: {}", detail.join("; "));
    }
    assert!(unexpected.is_empty(), "unexpected failures:\n{}", unexpected.join("\n"));
}
