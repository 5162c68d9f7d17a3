//! Seeded generators for random problems and series, shared by tests,
//! benchmarks and the CLI's self-checks.

use std::sync::Arc;

use num_rational::BigRational;
use rand::Rng;

use crate::scalar::{AlphaContext, BaseField, BaseNumber, SmallDenomScalar};
use crate::series::{GradedSeries, Monomial};

/// α = 2 for one degree of freedom, α = (1, √2) for two.
pub fn standard_context(d: usize) -> Arc<AlphaContext> {
    assert!((1..=2).contains(&d));
    if d == 1 {
        let f = BaseField::rational();
        return AlphaContext::new(f.clone(), vec![BaseNumber::from_i64(&f, 2)]);
    }
    let f = BaseField::sqrt(2).expect("sqrt 2");
    let alpha = vec![BaseNumber::one(&f), BaseNumber::theta(&f)];
    AlphaContext::new(f, alpha)
}

/// All monomials of exact weight `w` in `d` degrees of freedom.
pub fn monomials_of_weight(d: usize, w: u32, with_tau: bool) -> Vec<Monomial> {
    let mut out = Vec::new();
    let slots = 3 * d;
    let mut exps = vec![0u16; slots];
    fn rec(
        d: usize,
        slot: usize,
        left: u32,
        with_tau: bool,
        exps: &mut Vec<u16>,
        out: &mut Vec<Monomial>,
    ) {
        if slot == exps.len() {
            if left == 0 {
                out.push(Monomial::new(&exps[..d], &exps[d..2 * d], &exps[2 * d..]));
            }
            return;
        }
        let step = if slot >= 2 * d { 2 } else { 1 };
        if step == 2 && !with_tau {
            rec(d, slot + 1, left, with_tau, exps, out);
            return;
        }
        let mut e = 0u32;
        while e * step <= left {
            exps[slot] = e as u16;
            rec(d, slot + 1, left - e * step, with_tau, exps, out);
            e += 1;
        }
        exps[slot] = 0;
    }
    rec(d, 0, w, with_tau, &mut exps, &mut out);
    out
}

fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let n: i64 = rng.gen_range(-5..=5);
    let den: i64 = rng.gen_range(1..=4);
    BigRational::new(n.into(), den.into())
}

/// A random base-field number with small rational parts (no `i` component).
pub fn random_base<R: Rng>(field: &Arc<BaseField>, rng: &mut R) -> BaseNumber {
    let z = BigRational::from_integer(0.into());
    let t = if field.is_quadratic() && rng.gen_bool(0.3) {
        small_rational(rng)
    } else {
        z.clone()
    };
    BaseNumber::from_parts(field, [small_rational(rng), t, z.clone(), z])
}

/// A random coefficient; with `divisors` it may carry ω and one resonance form.
pub fn random_scalar<R: Rng>(ctx: &Arc<AlphaContext>, rng: &mut R, divisors: bool) -> SmallDenomScalar {
    let base = SmallDenomScalar::constant(ctx.dim(), random_base(ctx.field(), rng));
    if !divisors {
        return base;
    }
    let mut x = base;
    if rng.gen_bool(0.3) {
        let i = rng.gen_range(0..ctx.dim());
        x = x.add(&SmallDenomScalar::omega(ctx, i));
    }
    if rng.gen_bool(0.3) {
        let j: Vec<i64> = (0..ctx.dim()).map(|_| rng.gen_range(-2..=2)).collect();
        if let Ok(inv) = SmallDenomScalar::inv_pairing(ctx, &j) {
            x = x.mul(&inv);
        }
    }
    x
}

/// A random series with about `terms` monomials of weight in `lo..=hi`.
#[allow(clippy::too_many_arguments)]
pub fn random_series<R: Rng>(
    ctx: &Arc<AlphaContext>,
    rng: &mut R,
    cutoff: u32,
    lo: u32,
    hi: u32,
    terms: usize,
    with_tau: bool,
    divisors: bool,
) -> GradedSeries {
    let pool: Vec<Monomial> = (lo..=hi)
        .flat_map(|w| monomials_of_weight(ctx.dim(), w, with_tau))
        .collect();
    let mut s = GradedSeries::zero(ctx, cutoff);
    if pool.is_empty() {
        return s;
    }
    for _ in 0..terms {
        let m = pool[rng.gen_range(0..pool.len())].clone();
        s.add_term(m, random_scalar(ctx, rng, divisors));
    }
    s
}

/// `Σ α_i p_i q_i` plus a random perturbation in weights `lo..=hi` (q, p only).
pub fn random_problem_series<R: Rng>(
    ctx: &Arc<AlphaContext>,
    rng: &mut R,
    cutoff: u32,
    lo: u32,
    hi: u32,
    terms: usize,
) -> GradedSeries {
    let mut h = GradedSeries::zero(ctx, cutoff);
    for (i, a) in ctx.alpha().iter().enumerate() {
        let pq = GradedSeries::p(ctx, cutoff, i).mul(&GradedSeries::q(ctx, cutoff, i));
        h = h.add(&pq.scale_base(a));
    }
    h.add(&random_series(ctx, rng, cutoff, lo, hi, terms, false, false))
}
