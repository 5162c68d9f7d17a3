//! Subcommands: each turns a [`RunConfig`] into a [`Report`].

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use hnf::arithmetic::{
    absorb_rho, bruno_report, density_estimate, sigma_sequence, ArithError, ArithParams, BoundClass,
    EnumerationBudget, SequenceSpec,
};
use hnf::convergence::{
    arnold_moser_check, borel_check, cauchy_nagumo_check, hamiltonian_derivation_check, local_equiv_check,
    majorant_run, ConvergenceError, DiffOperator, MajorantParams, Poly, PowerSeries, RationalPoly, StartMode,
    Verdict,
};
use hnf::normalform::{
    birkhoff_normal_form, frequency_invariance_check, hnf_init, hnf_kam_step, hnf_step, in_trivial_part,
    omega_eliminate, Ledger, NormalFormError, NormalFormProblem, RemovalStrategy,
};
use hnf::series::GradedSeries;
use hnf::tori::{build_normalization, complexify, defect_scaling, Integrator, ToriError, TorusConfig};

use crate::config::{ArithCommand, Command, IntegratorKind, LemmaArgs, MajorantArgs, ProblemArgs, RunConfig, TorusArgs};
use crate::parse::{parse_input, InputError, Problem};
use crate::report::{Check, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: InputError },
    #[error("normal form: {0}")]
    NormalForm(#[from] NormalFormError),
    #[error("torus verification: {0}")]
    Tori(#[from] ToriError),
    #[error("arithmetic: {0}")]
    Arith(#[from] ArithError),
    #[error("convergence: {0}")]
    Convergence(#[from] ConvergenceError),
    #[error("writing report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn load(args: &ProblemArgs) -> Result<Problem, CliError> {
    let text = fs::read_to_string(&args.input).map_err(io_err(&args.input))?;
    parse_input(&text, args.cutoff).map_err(|source| CliError::Input { path: args.input.clone(), source })
}

/// Elliptic input is complexified first; the flag records whether that happened.
fn load_hyperbolic(args: &ProblemArgs) -> Result<(NormalFormProblem, bool), CliError> {
    to_hyperbolic(load(args)?)
}

fn to_hyperbolic(problem: Problem) -> Result<(NormalFormProblem, bool), CliError> {
    match problem {
        Problem::Hyperbolic(p) => Ok((p, false)),
        Problem::Elliptic(e) => Ok((complexify(&e)?, true)),
    }
}

/// Without `--cutoff`, the cutoff is raised to 2^(steps−1)+2 so that every
/// requested step has a nonempty window.
fn load_for_steps(args: &ProblemArgs, steps: usize) -> Result<(NormalFormProblem, bool), CliError> {
    let problem = load(args)?;
    let need = (1u32 << (steps - 1)) + 2;
    if args.cutoff.is_none() && problem.hamiltonian().cutoff() < need {
        let raised = ProblemArgs { input: args.input.clone(), cutoff: Some(need) };
        return load_hyperbolic(&raised);
    }
    to_hyperbolic(problem)
}

fn problem_params(args: &ProblemArgs, pb: &NormalFormProblem, complexified: bool) -> Value {
    json!({
        "input": args.input.display().to_string(),
        "cutoff": pb.cutoff(),
        "dim": pb.dim(),
        "complexified": complexified,
    })
}

fn ledger_value(ledger: &Ledger) -> Result<Value, serde_json::Error> {
    serde_json::to_value(ledger.entries().collect::<Vec<_>>())
}

fn canonical(s: &[GradedSeries]) -> Vec<String> {
    s.iter().map(GradedSeries::to_canonical).collect()
}

/// `order(e) − bound`, or `None` when `e` vanishes.
fn order_margin(e: &GradedSeries, bound: u32) -> Option<f64> {
    e.order().map(|o| f64::from(o) - f64::from(bound))
}

/// Pass flag and margin for `e = O(bound)`.
fn vanishes_below(e: &GradedSeries, bound: u32) -> (bool, Option<f64>) {
    (e.truncate(0, Some(bound)).is_zero(), order_margin(e, bound))
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    match &cfg.command {
        Command::Bnf(args) => bnf(args),
        Command::Hnf(args) => hnf(&args.problem, args.steps),
        Command::Freq(args) => freq(&args.problem, args.steps),
        Command::Arith(c) => arith(cfg, c),
        Command::Majorant(args) => majorant(cfg, args),
        Command::Lemmas(args) => lemmas(cfg, args),
        Command::Torus(args) => torus(cfg, args),
    }
}

fn bnf(args: &ProblemArgs) -> Result<Report, CliError> {
    let (pb, complexified) = load_hyperbolic(args)?;
    let mut ledger = Ledger::new();
    let a = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut ledger)?;
    let b = birkhoff_normal_form(&pb, RemovalStrategy::MonomialAtATime, &mut ledger)?;
    let mut report = Report::new("bnf", problem_params(args, &pb, complexified));
    report.checks.push(Check::single(
        "strategies_agree",
        json!({"strategies": ["degree_by_degree", "monomial_at_a_time"]}),
        a.frequency.bnf == b.frequency.bnf,
        order_margin(&a.frequency.bnf.sub(&b.frequency.bnf), pb.cutoff() + 1),
    ));
    let basis: Vec<Vec<String>> =
        a.frequency.basis.iter().map(|v| v.iter().map(|c| c.to_canonical()).collect()).collect();
    report.result = json!({
        "bnf": a.frequency.bnf.to_canonical(),
        "gradient": canonical(&a.frequency.gradient),
        "frequency_space": basis,
        "normal_form": a.normal_form.to_canonical(),
        "generators": a.generators.len(),
        "ledger_size": ledger.len(),
    });
    report.ledger = Some(ledger_value(&ledger)?);
    Ok(report)
}

fn hnf(args: &ProblemArgs, steps: usize) -> Result<Report, CliError> {
    let (pb, complexified) = load_for_steps(args, steps)?;
    let mut ledger = Ledger::new();
    let mut st = hnf_init(&pb);
    let (mut a, mut b) = (st.a().clone(), st.b().clone());
    let (mut window, mut structure, mut trivial, mut kam_form) = (vec![], vec![], vec![], vec![]);
    let mut rows = Vec::new();
    for n in 0..steps {
        let kam = hnf_kam_step(&a, &b, n, &mut ledger)?;
        let next = hnf_step(&st, &mut ledger)?;
        let v = &next.derivations()[n];
        let lo = 1u32 << n;
        let in_window = v.order().is_none_or(|o| o >= i64::from(lo)) && v == &v.order_window(lo, 2 * lo);
        window.push((in_window, v.order().map(|o| (o - i64::from(lo)) as f64)));
        structure.push(vanishes_below(&next.f().sub(next.a()), 2 * lo + 2));
        let s = next.increments().last().expect("one increment per step");
        trivial.push((in_trivial_part(s), None));
        let same = &kam.a == next.a() && &kam.b == next.b();
        kam_form.push((same, None));
        rows.push(json!({
            "n": n + 1,
            "generator_order": v.order(),
            "a": next.a().to_canonical(),
            "b": next.b().to_canonical(),
        }));
        a = kam.a;
        b = kam.b;
        st = next;
    }
    let mut report = Report::new("hnf", {
        let mut p = problem_params(args, &pb, complexified);
        p["steps"] = json!(steps);
        p
    });
    report.checks.push(Check::over("generator_order_window", json!({"window": "[2^n, 2^(n+1))"}), 0, &window));
    report.checks.push(Check::over("f_minus_a_order", json!({"bound": "2^(n+1)+2"}), 0, &structure));
    report.checks.push(Check::over("increment_in_trivial_part", json!({}), 0, &trivial));
    report.checks.push(Check::over("kam_form_matches_direct", json!({}), 0, &kam_form));
    report.result = json!({
        "steps": rows,
        "f": st.f().to_canonical(),
        "terminated": st.derivations().last().is_some_and(|v| v.order().is_none()),
        "ledger_size": ledger.len(),
    });
    report.ledger = Some(ledger_value(&ledger)?);
    Ok(report)
}

fn freq(args: &ProblemArgs, steps: usize) -> Result<Report, CliError> {
    let (pb, complexified) = load_for_steps(args, steps)?;
    let mut ledger = Ledger::new();
    let bnf = birkhoff_normal_form(&pb, RemovalStrategy::DegreeByDegree, &mut ledger)?;
    let mut st = hnf_init(&pb);
    let (mut energy, mut stated, mut attained, mut invariance) = (vec![], vec![], vec![], vec![]);
    let mut rows = Vec::new();
    let first = 2.min(steps);
    for n in 1..=steps {
        st = hnf_step(&st, &mut ledger)?;
        if n < first {
            continue;
        }
        let sol = omega_eliminate(&st, pb.cutoff())?;
        let bound = (1u32 << n) + 2;
        energy.push(vanishes_below(&sol.energy.sub(&bnf.frequency.bnf), bound));
        let errs: Vec<GradedSeries> =
            sol.frequency.iter().zip(&bnf.frequency.gradient).map(|(f, b)| f.sub(b)).collect();
        let worst = |bound: u32| {
            let all = errs.iter().all(|e| e.truncate(0, Some(bound)).is_zero());
            let margin = errs.iter().filter_map(|e| order_margin(e, bound)).reduce(f64::min);
            (all, margin)
        };
        stated.push(worst(bound));
        attained.push(worst(1 << n));
        let inv = frequency_invariance_check(&sol, &bnf.frequency);
        invariance.push((inv.passed(), Some(-(inv.offending.len() as f64))));
        rows.push(json!({
            "n": n,
            "energy": sol.energy.to_canonical(),
            "frequency": canonical(&sol.frequency),
            "omega": canonical(&sol.omega),
            "newton_rounds": sol.newton_rounds,
            "invariance_checked": inv.checked,
            "invariance_offending": inv.offending,
        }));
    }
    let mut report = Report::new("freq", {
        let mut p = problem_params(args, &pb, complexified);
        p["steps"] = json!(steps);
        p
    });
    report.checks.push(Check::over("energy_matches_bnf", json!({"bound": "2^n+2"}), first, &energy));
    report.checks.push(Check::over("frequency_matches_bnf", json!({"bound": "2^n+2"}), first, &stated));
    report.checks.push(Check::over("frequency_matches_bnf_below_2^n", json!({"bound": "2^n"}), first, &attained));
    report.checks.push(Check::over("frequency_space_invariance", json!({}), first, &invariance));
    let basis: Vec<Vec<String>> =
        bnf.frequency.basis.iter().map(|v| v.iter().map(|c| c.to_canonical()).collect()).collect();
    report.result = json!({
        "bnf": bnf.frequency.bnf.to_canonical(),
        "gradient": canonical(&bnf.frequency.gradient),
        "frequency_space": basis,
        "iterations": rows,
    });
    report.ledger = Some(ledger_value(&ledger)?);
    Ok(report)
}

fn complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn arith(cfg: &RunConfig, c: &ArithCommand) -> Result<Report, CliError> {
    let budget = EnumerationBudget::default();
    match c {
        ArithCommand::Sigma { beta, kmax, norm } => {
            let sigma = sigma_sequence(&complex(beta), *kmax, *norm, &budget)?;
            let mut report =
                Report::new("arith sigma", json!({"beta": beta, "kmax": kmax, "norm": norm.name()}));
            let steps: Vec<(bool, Option<f64>)> =
                sigma.windows(2).map(|w| (w[1] <= w[0], Some(w[0] - w[1]))).collect();
            report.checks.push(Check::over("sigma_nonincreasing", json!({}), 1, &steps));
            report.add_csv(
                "sigma.csv",
                &["k", "sigma"],
                sigma.iter().enumerate().map(|(k, s)| vec![k.to_string(), num(*s)]),
            )?;
            report.result = json!({ "sigma": sigma });
            Ok(report)
        }
        ArithCommand::Bruno { seq, terms } => {
            let r = bruno_report(seq, *terms)?;
            let mut report = Report::new("arith bruno", json!({"seq": seq.to_string(), "terms": terms}));
            report.result = serde_json::to_value(&r)?;
            Ok(report)
        }
        ArithCommand::Zn { alpha, a, rho, s0, kmax, pairs } => zn(cfg, alpha, a, rho, *s0, *kmax, *pairs),
        ArithCommand::Absorb { class, a, b, s0, n } => {
            let bits = cfg.precision.unwrap_or(128);
            let class = BoundClass::new(class[0], class[1], class[2], class[3])?;
            let r = absorb_rho(&class, a, b, *s0, *n, bits)?;
            let outcomes: Vec<(bool, Option<f64>)> = r
                .ratios
                .iter()
                .enumerate()
                .map(|(k, q)| (r.first_failure.is_none_or(|f| k < f), Some(1.0 - q)))
                .collect();
            let mut report = Report::new(
                "arith absorb",
                json!({"class": class, "a": a.to_string(), "b": b.to_string(), "s0": s0, "n": n, "precision": bits}),
            );
            let mut check = Check::over("absorption", json!({"inequality": "u_n < K b_n"}), 0, &outcomes);
            check.first_failure = r.first_failure;
            check.pass = r.holds();
            report.checks.push(check);
            report.result = serde_json::to_value(&r)?;
            Ok(report)
        }
        ArithCommand::Density { beta, a, epsilon, kmax, samples, norm } => {
            let terms = a.terms(*kmax as usize + 1)?;
            let r = density_estimate(beta, &terms, *epsilon, *kmax, *samples, cfg.seed, *norm, &budget)?;
            let report_params = json!({
                "beta": beta, "a": a.to_string(), "epsilon": epsilon, "kmax": kmax,
                "samples": samples, "norm": norm.name(), "seed": cfg.seed,
            });
            let mut report = Report::new("arith density", report_params);
            report.result = serde_json::to_value(&r)?;
            Ok(report)
        }
    }
}

fn zn(
    cfg: &RunConfig,
    alpha: &[f64],
    a: &SequenceSpec,
    rho: &SequenceSpec,
    s0: f64,
    levels: usize,
    pairs: usize,
) -> Result<Report, CliError> {
    let p = ArithParams::new(alpha.to_vec(), a.clone(), rho.clone(), s0, levels)?;
    let mut shrink = Vec::new();
    let mut nesting = Vec::new();
    let mut rows = Vec::new();
    for n in 0..=levels {
        let seed = cfg.seed.wrapping_add(n as u64);
        let r = p.shrink_check(n, pairs, seed)?;
        shrink.push((r.violations == 0 && r.pairs == pairs, Some(-(r.violations as f64))));
        let (members, violations) = p.nesting_check(n, pairs, seed)?;
        nesting.push((violations == 0, Some(-(violations as f64))));
        rows.push(json!({"shrink": r, "nesting_members": members, "nesting_violations": violations}));
    }
    let mut report = Report::new(
        "arith zn",
        json!({
            "alpha": alpha, "a": a.to_string(), "rho": rho.to_string(), "s0": s0,
            "kmax": levels, "pairs": pairs, "seed": cfg.seed,
        }),
    );
    report.checks.push(Check::over("shrink_lemma", json!({"tolerance": 0}), 0, &shrink));
    report.checks.push(Check::over("z_sets_nested", json!({}), 0, &nesting));
    report.result = json!({ "radii": p.radii(), "levels": rows });
    Ok(report)
}

fn parse_start_json(s: StartMode) -> Value {
    match s {
        StartMode::Threshold => json!("threshold"),
        StartMode::Scaled(f) => json!(format!("scaled:{f}")),
        StartMode::Value(x) => json!(format!("value:{x}")),
    }
}

fn verdict_check(name: &str, v: &Verdict, n: usize) -> Check {
    Check {
        check: name.into(),
        params: json!({}),
        n_range: Some([0, n]),
        first_failure: v.first_failure,
        margins: Vec::new(),
        pass: v.holds,
    }
}

fn majorant(cfg: &RunConfig, args: &MajorantArgs) -> Result<Report, CliError> {
    let bits = cfg.precision.unwrap_or(256);
    let params = MajorantParams::new(args.r, args.kappa, args.start, args.n).with_bits(bits);
    let run = majorant_run(&params)?;
    let mut report = Report::new(
        "majorant",
        json!({"r": args.r, "kappa": args.kappa, "start": parse_start_json(args.start), "n": args.n, "precision": bits}),
    );
    let mut closed = verdict_check("closed_form_matches_recursion", &run.closed_form, args.n);
    closed.params = json!({"rel_tol": 1e-12});
    closed.margins = vec![Some(1e-12 - run.closed_form_error)];
    report.checks.push(closed);
    report.checks.push(verdict_check("y_lower_bound", &run.y_lower_bound, args.n));
    if run.condition_c {
        report.checks.push(verdict_check("decrease_under_condition_c", &run.decrease, args.n));
    } else {
        report.checks.push(Check::single("divergence_detected", json!({}), run.divergence.is_some(), None));
    }
    report.checks.push(verdict_check("x_below_y", &run.x_below_y, args.n));
    report.checks.push(verdict_check("y_below_z", &run.y_below_z, args.n));
    let rows = (0..run.ln_z.len()).map(|k| {
        let at = |v: &[f64]| v.get(k).map_or(String::new(), |x| num(*x));
        vec![k.to_string(), at(&run.ln_x), at(&run.ln_y), at(&run.ln_z), at(&run.beta), at(&run.gamma)]
    });
    report.add_csv("majorant.csv", &["n", "ln_x", "ln_y", "ln_z", "beta", "gamma"], rows)?;
    report.result = serde_json::to_value(&run)?;
    Ok(report)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, degree: u32, terms: usize) -> Result<Poly, ConvergenceError> {
    let t = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..degree {
                e[rng.gen_range(0..dim)] += 1;
            }
            (e, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    Poly::new(dim, t)
}

fn lemmas(cfg: &RunConfig, args: &LemmaArgs) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report =
        Report::new("lemmas", json!({"samples": args.samples, "instances": args.instances, "seed": cfg.seed}));
    let (t, s) = (rat(1, 1), rat(1, 2));

    let mut mono = Vec::new();
    for (d, n) in [(1usize, 0u32), (1, 3), (2, 4), (3, 2), (2, 6)] {
        let mut e = vec![0u32; d];
        e[0] = n;
        let f = RationalPoly { dim: d, terms: vec![(e, rat(3, 1), rat(-1, 2))] };
        let r = arnold_moser_check(&f, n, &t, &s)?;
        mono.push((r.equality && r.pass, Some(r.rhs - r.lhs)));
    }
    report.checks.push(Check::over("arnold_moser_monomial_equality", json!({"t": "1", "s": "1/2"}), 0, &mono));

    let mut random = Vec::new();
    for _ in 0..100 {
        let terms = (0..rng.gen_range(1..6))
            .map(|_| {
                let a = rng.gen_range(0..4u32);
                let b = rng.gen_range(3u32.saturating_sub(a)..5);
                (vec![a, b], rat(rng.gen_range(-9..10), rng.gen_range(1..5)), rat(rng.gen_range(-9..10), 3))
            })
            .collect();
        let r = arnold_moser_check(&RationalPoly { dim: 2, terms }, 3, &t, &s)?;
        random.push((r.pass, Some(r.rhs - r.lhs)));
    }
    report.checks.push(Check::over("arnold_moser_random", json!({"order": 3, "count": 100}), 0, &random));

    let borel = borel_check(&PowerSeries::geometric(200), 0.25, 1.0, 0.5)?;
    report.checks.push(Check::single(
        "borel_geometric_instance",
        json!({"u_norm": 0.25, "t": 1.0, "s": 0.5, "expected_rhs": 2.0}),
        borel.pass && borel.rhs == 2.0,
        Some(borel.rhs - borel.lhs_bound),
    ));

    let mut cn = Vec::new();
    let mut ham = Vec::new();
    let mut local = Vec::new();
    for i in 0..args.instances as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let order = rng.gen_range(1..=2u32);
        let op = DiffOperator {
            terms: (0..3)
                .map(|_| {
                    let mut j = vec![0u32; 2];
                    for _ in 0..order {
                        j[rng.gen_range(0..2)] += 1;
                    }
                    (j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect(),
        };
        let f = random_poly(&mut rng, 2, 4, 5)?;
        let r = cauchy_nagumo_check(&op, &f, &[1.0, 1.0], &[0.7, 0.7], args.samples, seed)?;
        cn.push((r.pass, Some(r.bound - r.observed)));

        let h = random_poly(&mut rng, 4, 3, 6)?;
        let g = random_poly(&mut rng, 4, 3, 6)?;
        let r = hamiltonian_derivation_check(&h, &g, &[1.0; 4], &[0.6; 4], args.samples, seed)?;
        ham.push((r.pass, Some(r.bound - r.observed)));

        let f = random_poly(&mut rng, 2, 2, 4)?;
        let r = local_equiv_check(&f, &[1.0, 1.0], &[0.5, 0.5], args.samples, seed)?;
        local.push((r.pass, Some(r.bound - r.observed)));
    }
    report.checks.push(Check::over("cauchy_nagumo", json!({"t": 1.0, "s": 0.7}), 0, &cn));
    report.checks.push(Check::over("hamiltonian_derivation", json!({"t": 1.0, "s": 0.6}), 0, &ham));
    report.checks.push(Check::over("local_equivalence", json!({"t": 1.0, "s": 0.5}), 0, &local));
    report.result = json!({ "borel": borel });
    Ok(report)
}

fn torus(cfg: &RunConfig, args: &TorusArgs) -> Result<Report, CliError> {
    let problem_args = ProblemArgs { input: args.problem.input.clone(), cutoff: Some(args.problem.cutoff.unwrap_or(6)) };
    let problem = match load(&problem_args)? {
        Problem::Elliptic(e) => e,
        Problem::Hyperbolic(_) => return Err(CliError::Config("torus needs an elliptic problem".into())),
    };
    let cutoff = problem.cutoff();
    let d = problem.dim();
    let weights = args.weights.clone().unwrap_or_else(|| vec![1.0; d]);
    if weights.len() != d {
        return Err(CliError::Config(format!("--weights has {} entries, d = {d}", weights.len())));
    }
    let integrator = match args.integrator {
        IntegratorKind::Rk8 => Integrator::Rk8 { rtol: args.rtol, atol: args.atol },
        IntegratorKind::Leapfrog => Integrator::Leapfrog { dt: args.dt },
    };
    let config = TorusConfig {
        t_span: args.t_span,
        sample_dt: args.sample_dt,
        trajectories: args.trajectories,
        seed: cfg.seed,
        integrator,
        keep_samples: args.dump,
        ..TorusConfig::default()
    };
    let norm = build_normalization(&problem, cutoff, args.steps)?;
    let mut scaling = defect_scaling(&norm, &args.rho, &weights, &config)?;

    let mut report = Report::new(
        "torus",
        json!({
            "input": args.problem.input.display().to_string(),
            "cutoff": cutoff, "steps": args.steps, "rho": args.rho, "weights": weights,
            "config": config,
        }),
    );
    report.checks.push(Check::single("map_certified", json!({}), norm.certified, None));
    let energy: Vec<(bool, Option<f64>)> = scaling.reports.iter().map(|r| (r.energy_ok, Some(-r.energy_drift))).collect();
    report.checks.push(Check::over("energy_drift", json!({"budget": "10*tol*|H0|"}), 0, &energy));
    report.checks.push(Check::single(
        "defect_slope",
        json!({"required": scaling.required_slope}),
        scaling.slope_pass,
        Some(scaling.slope - scaling.required_slope),
    ));
    report.checks.push(Check::single("defect_monotone", json!({}), scaling.monotone, None));
    let freq: Vec<(bool, Option<f64>)> = scaling
        .frequency_errors
        .iter()
        .zip(&scaling.frequency_bounds)
        .map(|(e, b)| (e <= b, Some(b - e)))
        .collect();
    report.checks.push(Check::over("frequency_error", json!({"bound": "10*rho^(N-2)"}), 0, &freq));

    if args.dump {
        for (k, r) in scaling.reports.iter().enumerate() {
            let Some(samples) = r.trajectories.first().and_then(|t| t.samples.as_ref()) else { continue };
            let mut header = vec!["t".to_string()];
            header.extend((1..=d).map(|i| format!("q{i}")));
            header.extend((1..=d).map(|i| format!("p{i}")));
            header.extend((1..=d).map(|i| format!("action{i}")));
            header.push("energy".into());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = samples.iter().map(|s| {
                let mut row = vec![num(s.t)];
                row.extend(s.state.iter().chain(&s.actions).map(|x| num(*x)));
                row.push(num(s.energy));
                row
            });
            report.add_csv(&format!("trajectory_rho{k}.csv"), &header, rows)?;
        }
    }
    for r in &mut scaling.reports {
        for t in &mut r.trajectories {
            t.samples = None;
        }
    }
    report.result = json!({
        "frequency": canonical(&norm.frequency),
        "certified": norm.certified,
        "separable": norm.separable,
        "scaling": scaling,
        "ledger_size": norm.ledger.len(),
    });
    report.ledger = Some(ledger_value(&norm.ledger)?);
    Ok(report)
}

/// Write the report (or print it) and the ledger. Returns whether every check passed.
pub fn emit(cfg: &RunConfig, report: &Report) -> Result<bool, CliError> {
    let json = report.to_json()?;
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join("report.json");
            fs::write(&path, json).map_err(io_err(&path))?;
            for f in &report.csv {
                let path = dir.join(&f.name);
                fs::write(&path, &f.contents).map_err(io_err(&path))?;
            }
        }
        None => print!("{json}"),
    }
    if let Some(path) = &cfg.ledger {
        let mut with_ledger = report.clone();
        with_ledger.ledger.get_or_insert_with(|| json!([]));
        let text = with_ledger.ledger_json()?.expect("ledger present");
        fs::write(path, text).map_err(io_err(path))?;
    }
    Ok(report.passed())
}

/// Run and write outputs.
pub fn execute(cfg: &RunConfig) -> Result<bool, CliError> {
    let report = run(cfg)?;
    emit(cfg, &report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn write_input(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("h.txt");
        fs::write(&path, text).unwrap();
        path
    }

    fn config(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("hnf").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn worked_example_passes_every_hnf_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_input(dir.path(), "d=1\nalpha: [2]\nform: hyperbolic\nH: 2*p1*q1 + p1^2*q1^2\n");
        let cfg = config(&["hnf", path.to_str().unwrap(), "--steps", "3", "--cutoff", "10"]);
        let r = run(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.failures().is_empty());
        assert_eq!(r.result["steps"].as_array().unwrap().len(), 3);
        assert_eq!(r.result["terminated"], json!(true));
    }

    #[test]
    fn default_cutoff_covers_requested_steps() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_input(dir.path(), "d=1\nalpha: [2]\nform: hyperbolic\nH: 2*p1*q1 + p1^2*q1^2\n");
        let r = run(&config(&["hnf", path.to_str().unwrap(), "--steps", "4"])).unwrap();
        assert_eq!(r.params["cutoff"], json!(10));
        let r = run(&config(&["hnf", path.to_str().unwrap(), "--steps", "1"])).unwrap();
        assert_eq!(r.params["cutoff"], json!(4));
    }

    #[test]
    fn bnf_of_cubic() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_input(dir.path(), "d=1\nalpha: [2]\nform: hyperbolic\nH: 2*p1*q1 + p1^3\n");
        let r = run(&config(&["bnf", path.to_str().unwrap(), "--cutoff", "6"])).unwrap();
        assert!(r.passed());
        assert_eq!(r.result["bnf"], json!("2*tau1"));
    }

    #[test]
    fn sigma_writes_csv() {
        let r = run(&config(&["arith", "sigma", "--kmax", "3"])).unwrap();
        assert!(r.passed());
        let csv = &r.csv[0].contents;
        assert!(csv.starts_with("k,sigma\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn majorant_reports_threshold_failure() {
        let r = run(&config(&["majorant", "--n", "20"])).unwrap();
        assert_eq!(r.failures(), vec!["y_lower_bound"]);
        let r = run(&config(&["majorant", "--n", "20", "--start", "scaled:0.5"])).unwrap();
        assert!(r.failures().iter().all(|f| *f == "y_lower_bound"), "{:?}", r.failures());
        assert!(r.checks.iter().any(|c| c.check == "decrease_under_condition_c" && c.pass));
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let e = run(&config(&["hnf", "missing.txt", "--steps", "0"])).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        let e = run(&config(&["hnf", "missing.txt"])).unwrap_err();
        assert!(matches!(e, CliError::Io { .. }));
        assert!(RunConfig::try_parse_from(["hnf", "majorant", "--colour", "red"]).is_err());
        assert!(RunConfig::try_parse_from(["hnf", "majorant", "--start", "later"]).is_err());
    }

    #[test]
    fn parse_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_input(dir.path(), "d=1\nalpha: [2]\nform: hyperbolic\nH: 2*p1*q1 +\n");
        let e = run(&config(&["bnf", path.to_str().unwrap()])).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("h.txt") && msg.contains("line 4"), "{msg}");
    }
}
