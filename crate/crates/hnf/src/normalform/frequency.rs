use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::iteration::IterationState;
use super::linalg::{in_span, invert, rref};
use super::NormalFormError;
use crate::scalar::{AlphaContext, BaseNumber, SmallDenomScalar};
use crate::series::{GradedSeries, Monomial};

/// Birkhoff data in the Moser variables.
#[derive(Clone, Debug)]
pub struct FrequencyData {
    /// `B(τ)`.
    pub bnf: GradedSeries,
    /// `b = ∇B(τ)`.
    pub gradient: Vec<GradedSeries>,
    /// Row-reduced basis of the frequency space.
    pub basis: Vec<Vec<BaseNumber>>,
}

fn base_of(c: &SmallDenomScalar, field: &Arc<crate::scalar::BaseField>) -> BaseNumber {
    if c.is_zero() {
        return BaseNumber::zero(field);
    }
    c.as_constant()
        .cloned()
        .expect("frequency coefficients are omega-free constants")
}

/// Coefficient vectors of a vector of τ-series, one per τ-monomial in `filter`.
fn coefficient_vectors<F: Fn(&Monomial) -> bool>(
    series: &[GradedSeries],
    filter: F,
) -> Vec<(Monomial, Vec<BaseNumber>)> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let field = first.ctx().field().clone();
    let monos: BTreeSet<Monomial> = series
        .iter()
        .flat_map(|s| s.terms().map(|(m, _)| m.clone()))
        .filter(|m| filter(m))
        .collect();
    monos
        .into_iter()
        .map(|m| {
            let v = series
                .iter()
                .map(|s| s.coeff(&m).map_or_else(|| BaseNumber::zero(&field), |c| base_of(c, &field)))
                .collect();
            (m, v)
        })
        .collect()
}

/// Span of the Taylor coefficients of `b` with `1 ≤ |a| ≤ max_order`.
///
/// `∇^a b(0)` is `a!` times the coefficient of `τ^a`; the factorial does not
/// change the span.
pub fn frequency_space(gradient: &[GradedSeries], max_order: u32) -> Vec<Vec<BaseNumber>> {
    let rows: Vec<Vec<BaseNumber>> = coefficient_vectors(gradient, |m| {
        let deg: u32 = m.c().iter().map(|&e| u32::from(e)).sum();
        deg >= 1 && deg <= max_order
    })
    .into_iter()
    .map(|(_, v)| v)
    .collect();
    rref(&rows)
}

/// Evaluates SD-scalar coefficients at `ω = ω(τ)`, caching powers and inverses.
struct OmegaSubstitution<'a> {
    ctx: Arc<AlphaContext>,
    omega: &'a [GradedSeries],
    cutoff: u32,
    powers: HashMap<(usize, u32), GradedSeries>,
    inverses: BTreeMap<Vec<i64>, GradedSeries>,
}

impl<'a> OmegaSubstitution<'a> {
    fn new(omega: &'a [GradedSeries], cutoff: u32) -> Self {
        let ctx = omega[0].ctx().clone();
        assert!(
            omega.iter().all(|w| w.order().is_none_or(|o| o >= 1)),
            "omega(tau) must vanish at tau = 0"
        );
        Self {
            ctx,
            omega,
            cutoff,
            powers: HashMap::new(),
            inverses: BTreeMap::new(),
        }
    }

    fn one(&self) -> GradedSeries {
        GradedSeries::constant(&self.ctx, self.cutoff, SmallDenomScalar::one(&self.ctx))
    }

    fn power(&mut self, i: usize, e: u32) -> GradedSeries {
        if e == 0 {
            return self.one();
        }
        if let Some(p) = self.powers.get(&(i, e)) {
            return p.clone();
        }
        let p = self.power(i, e - 1).mul(&self.omega[i].with_cutoff(self.cutoff));
        self.powers.insert((i, e), p.clone());
        p
    }

    /// `1 / ((α, J) + Σ J_k ω_k(τ))` as a τ-series.
    fn inverse(&mut self, j: &[i64], value: &BaseNumber) -> GradedSeries {
        if let Some(s) = self.inverses.get(j) {
            return s.clone();
        }
        let inv_v = value.inv().expect("nonzero pairing");
        let mut delta = GradedSeries::zero(&self.ctx, self.cutoff);
        for (k, &jk) in j.iter().enumerate() {
            if jk != 0 {
                let w = self.omega[k].with_cutoff(self.cutoff);
                delta = delta.add(&w.scale_rational(&num_rational::BigRational::from_integer(jk.into())));
            }
        }
        let delta = delta.scale_base(&inv_v).neg();
        // Σ (−δ)^k terminates since δ has positive order.
        let mut out = self.one();
        let mut term = self.one();
        loop {
            term = term.mul(&delta);
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        let out = out.scale_base(&inv_v);
        self.inverses.insert(j.to_vec(), out.clone());
        out
    }

    fn scalar(&mut self, x: &SmallDenomScalar) -> GradedSeries {
        let mut num = GradedSeries::zero(&self.ctx, self.cutoff);
        for (e, c) in x.numerator().terms() {
            let mut t = self.one().scale_base(c);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t = t.mul(&self.power(i, ei));
                }
            }
            num = num.add(&t);
        }
        for (form, &mult) in x.denominator() {
            let inv = self.inverse(form.j(), form.value());
            for _ in 0..mult {
                num = num.mul(&inv);
            }
        }
        num
    }

    fn series(&mut self, s: &GradedSeries) -> GradedSeries {
        let mut out = GradedSeries::zero(&self.ctx, self.cutoff);
        for (m, c) in s.terms() {
            if m.weight() > self.cutoff {
                continue;
            }
            let mono = GradedSeries::term(&self.ctx, self.cutoff, m.clone(), SmallDenomScalar::one(&self.ctx));
            out = out.add(&mono.mul(&self.scalar(c)));
        }
        out
    }
}

/// Replace ω by the τ-series `omega` in every coefficient of `s`, truncating at `cutoff`.
pub fn substitute_omega(s: &GradedSeries, omega: &[GradedSeries], cutoff: u32) -> GradedSeries {
    OmegaSubstitution::new(omega, cutoff).series(s)
}

/// Result of solving `R_n(ω, τ) = 0` for `ω = ω_n(τ)`.
#[derive(Clone, Debug)]
pub struct OmegaSolution {
    /// `R_{n,i} = Φ_n(ω_i)`.
    pub constraints: Vec<GradedSeries>,
    /// `ω_n(τ)`.
    pub omega: Vec<GradedSeries>,
    /// `α + ω_n(τ)`.
    pub frequency: Vec<GradedSeries>,
    /// `h_n(τ)`: the Moser part of `F_n` at `pq = τ`, `ω = ω_n(τ)`.
    pub energy: GradedSeries,
    pub newton_rounds: usize,
}

/// Solve `Φ_n(ω_i) = 0` for `ω(τ)` by Newton iteration to weight `order`.
pub fn omega_eliminate(state: &IterationState, order: u32) -> Result<OmegaSolution, NormalFormError> {
    let ctx = state.f().ctx().clone();
    let d = ctx.dim();
    let cutoff = state.cutoff();
    let order = order.min(cutoff);
    let mut constraints = Vec::with_capacity(d);
    for i in 0..d {
        let r = state.transform(&GradedSeries::omega(&ctx, cutoff, i))?;
        constraints.push(r.with_cutoff(order));
    }
    let jac: Vec<Vec<GradedSeries>> = constraints
        .iter()
        .map(|r| (0..d).map(|j| r.d_omega(j)).collect())
        .collect();

    let zero = GradedSeries::zero(&ctx, order);
    let mut omega = vec![zero.clone(); d];
    let max_rounds = order as usize + 4;
    let mut rounds = 0;
    loop {
        let mut sub = OmegaSubstitution::new(&omega, order);
        let residual: Vec<GradedSeries> = constraints.iter().map(|r| sub.series(r)).collect();
        if residual.iter().all(GradedSeries::is_zero) {
            break;
        }
        if rounds == max_rounds {
            return Err(NormalFormError::NewtonStalled(rounds));
        }
        rounds += 1;
        let j_at: Vec<Vec<GradedSeries>> = jac
            .iter()
            .map(|row| row.iter().map(|x| sub.series(x)).collect())
            .collect();
        let j0: Vec<Vec<BaseNumber>> = j_at
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        x.coeff(&Monomial::one(d))
                            .map_or_else(|| BaseNumber::zero(ctx.field()), |c| base_of(c, ctx.field()))
                    })
                    .collect()
            })
            .collect();
        let j0_inv = invert(&j0).ok_or(NormalFormError::NewtonNonUnit)?;
        let rest: Vec<Vec<GradedSeries>> = j_at.iter().map(|row| row.iter().map(|x| x.truncate(1, None)).collect()).collect();
        // Solve J δ = residual by δ ← J₀⁻¹(residual − (J − J₀) δ).
        let mut delta = vec![zero.clone(); d];
        for _ in 0..=order {
            let rhs: Vec<GradedSeries> = (0..d)
                .map(|i| {
                    let mut s = residual[i].clone();
                    for (k, dk) in delta.iter().enumerate() {
                        s = s.sub(&rest[i][k].mul(dk));
                    }
                    s
                })
                .collect();
            let next: Vec<GradedSeries> = (0..d)
                .map(|i| {
                    let mut s = zero.clone();
                    for (k, rk) in rhs.iter().enumerate() {
                        if !j0_inv[i][k].is_zero() {
                            s = s.add(&rk.scale_base(&j0_inv[i][k]));
                        }
                    }
                    s
                })
                .collect();
            if next == delta {
                break;
            }
            delta = next;
        }
        omega = omega.iter().zip(&delta).map(|(w, dw)| w.sub(dw)).collect();
    }

    let frequency = omega
        .iter()
        .zip(ctx.alpha())
        .map(|(w, a)| {
            w.add(&GradedSeries::constant(
                &ctx,
                order,
                SmallDenomScalar::constant(d, a.clone()),
            ))
        })
        .collect();
    let energy = substitute_omega(&state.f().moser_project().moser_on_tau(), &omega, order);
    Ok(OmegaSolution {
        constraints,
        omega,
        frequency,
        energy,
        newton_rounds: rounds,
    })
}

/// Membership of the τ-coefficient vectors of `ω_n(τ)` in the frequency space.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub checked: usize,
    /// `(τ-monomial, coefficient vector)` pairs outside the span.
    pub offending: Vec<(String, Vec<String>)>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

pub fn frequency_invariance_check(solution: &OmegaSolution, fd: &FrequencyData) -> InvarianceReport {
    let vectors = coefficient_vectors(&solution.omega, |_| true);
    let offending = vectors
        .iter()
        .filter(|(_, v)| !in_span(&fd.basis, v))
        .map(|(m, v)| (m.to_canonical(), v.iter().map(BaseNumber::to_canonical).collect()))
        .collect();
    InvarianceReport {
        checked: vectors.len(),
        offending,
    }
}
