//! The graded truncated Poisson algebra in (τ, q, p).
//!
//! Variables q_i and p_i have weight 1 and τ_i has weight 2; ω lives in the
//! coefficients and carries weight 0. A [`GradedSeries`] keeps every monomial
//! of weight at most its cutoff and never stores a zero coefficient.

mod derivation;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{AlphaContext, BaseNumber, SdSum, SmallDenomScalar};

pub use derivation::PoissonDerivation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series is not in the Moser algebra: monomial {0} has a != b")]
    NotInMoserAlgebra(String),
    #[error("derivation has order {0}, exponentials need order >= 1")]
    NonPositiveOrder(i64),
}

/// Exponents of `p^a q^b τ^c`, ordered by weight first, then lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    weight: u32,
    /// Layout `[a_1..a_d, b_1..b_d, c_1..c_d]`.
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn new(a: &[u16], b: &[u16], c: &[u16]) -> Self {
        let mut exps = Vec::with_capacity(3 * a.len());
        exps.extend_from_slice(a);
        exps.extend_from_slice(b);
        exps.extend_from_slice(c);
        Self::from_exps(exps.into_boxed_slice())
    }

    fn from_exps(exps: Box<[u16]>) -> Self {
        let d = exps.len() / 3;
        let w: u32 = exps[..2 * d].iter().map(|&x| u32::from(x)).sum::<u32>()
            + 2 * exps[2 * d..].iter().map(|&x| u32::from(x)).sum::<u32>();
        Self { weight: w, exps }
    }

    pub fn one(d: usize) -> Self {
        Self::from_exps(vec![0; 3 * d].into_boxed_slice())
    }

    pub fn dim(&self) -> usize {
        self.exps.len() / 3
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Exponents of p.
    pub fn a(&self) -> &[u16] {
        &self.exps[..self.dim()]
    }

    /// Exponents of q.
    pub fn b(&self) -> &[u16] {
        let d = self.dim();
        &self.exps[d..2 * d]
    }

    /// Exponents of τ.
    pub fn c(&self) -> &[u16] {
        let d = self.dim();
        &self.exps[2 * d..]
    }

    /// `a - b`, the resonance vector of the monomial.
    pub fn resonance(&self) -> Vec<i64> {
        self.a()
            .iter()
            .zip(self.b())
            .map(|(&x, &y)| i64::from(x) - i64::from(y))
            .collect()
    }

    /// True for monomials `(pq)^a τ^c` of the Moser algebra.
    pub fn is_moser(&self) -> bool {
        self.a() == self.b()
    }

    pub fn is_central(&self) -> bool {
        self.exps[..2 * self.dim()].iter().all(|&x| x == 0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let exps: Box<[u16]> = self.exps.iter().zip(o.exps.iter()).map(|(x, y)| x + y).collect();
        Self {
            weight: self.weight + o.weight,
            exps,
        }
    }

    /// Lower exponent `slot` by one, returning the old exponent.
    fn lowered(&self, slot: usize) -> Option<(u16, Self)> {
        let e = self.exps[slot];
        if e == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[slot] -= 1;
        Some((e, Self::from_exps(exps)))
    }

    pub fn d_p(&self, i: usize) -> Option<(u16, Self)> {
        self.lowered(i)
    }

    pub fn d_q(&self, i: usize) -> Option<(u16, Self)> {
        self.lowered(self.dim() + i)
    }

    pub fn d_tau(&self, i: usize) -> Option<(u16, Self)> {
        self.lowered(2 * self.dim() + i)
    }

    /// Replace every `p_i q_i` pair and τ by powers of τ: `p^a q^a τ^c ↦ τ^{a+c}`.
    pub fn moser_to_tau(&self) -> Self {
        let d = self.dim();
        let mut exps = vec![0u16; 3 * d];
        for i in 0..d {
            exps[2 * d + i] = self.a()[i] + self.c()[i];
        }
        Self::from_exps(exps.into_boxed_slice())
    }

    pub fn to_canonical(&self) -> String {
        let d = self.dim();
        let mut parts = Vec::new();
        let mut push = |name: &str, i: usize, e: u16| {
            if e == 1 {
                parts.push(format!("{name}{}", i + 1));
            } else if e > 1 {
                parts.push(format!("{name}{}^{e}", i + 1));
            }
        };
        for i in 0..d {
            push("tau", i, self.c()[i]);
        }
        for i in 0..d {
            push("q", i, self.b()[i]);
        }
        for i in 0..d {
            push("p", i, self.a()[i]);
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

/// Accumulator from monomials to deferred scalar sums.
struct Accum {
    dim: usize,
    cutoff: u32,
    map: BTreeMap<Monomial, SdSum>,
}

impl Accum {
    fn new(dim: usize, cutoff: u32) -> Self {
        Self {
            dim,
            cutoff,
            map: BTreeMap::new(),
        }
    }

    fn slot(&mut self, m: Monomial) -> Option<&mut SdSum> {
        if m.weight > self.cutoff {
            return None;
        }
        let dim = self.dim;
        Some(self.map.entry(m).or_insert_with(|| SdSum::new(dim)))
    }

    fn push(&mut self, m: Monomial, c: &SmallDenomScalar) {
        if let Some(s) = self.slot(m) {
            s.push(c);
        }
    }

    fn push_scaled(&mut self, m: Monomial, c: &SmallDenomScalar, k: &BigRational) {
        if let Some(s) = self.slot(m) {
            s.push_scaled(c, k);
        }
    }

    fn push_product(
        &mut self,
        m: Monomial,
        x: &SmallDenomScalar,
        y: &SmallDenomScalar,
        k: &BigRational,
    ) {
        if let Some(s) = self.slot(m) {
            s.push_product(x, y, k);
        }
    }

    fn finish(self, ctx: Arc<AlphaContext>) -> GradedSeries {
        let terms = self
            .map
            .into_iter()
            .filter_map(|(m, s)| {
                let c = s.finish();
                (!c.is_zero()).then_some((m, c))
            })
            .collect();
        GradedSeries {
            ctx,
            cutoff: self.cutoff,
            terms,
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Sparse truncated series over small-denominator scalars.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedSeries {
    ctx: Arc<AlphaContext>,
    cutoff: u32,
    terms: BTreeMap<Monomial, SmallDenomScalar>,
}

impl GradedSeries {
    pub fn zero(ctx: &Arc<AlphaContext>, cutoff: u32) -> Self {
        Self {
            ctx: ctx.clone(),
            cutoff,
            terms: BTreeMap::new(),
        }
    }

    /// A single term; dropped when above the cutoff or zero.
    pub fn term(ctx: &Arc<AlphaContext>, cutoff: u32, m: Monomial, c: SmallDenomScalar) -> Self {
        let mut s = Self::zero(ctx, cutoff);
        s.add_term(m, c);
        s
    }

    pub fn constant(ctx: &Arc<AlphaContext>, cutoff: u32, c: SmallDenomScalar) -> Self {
        Self::term(ctx, cutoff, Monomial::one(ctx.dim()), c)
    }

    fn unit_var(ctx: &Arc<AlphaContext>, cutoff: u32, slot: usize) -> Self {
        let d = ctx.dim();
        let mut exps = vec![0u16; 3 * d];
        exps[slot] = 1;
        Self::term(
            ctx,
            cutoff,
            Monomial::from_exps(exps.into_boxed_slice()),
            SmallDenomScalar::one(ctx),
        )
    }

    pub fn p(ctx: &Arc<AlphaContext>, cutoff: u32, i: usize) -> Self {
        Self::unit_var(ctx, cutoff, i)
    }

    pub fn q(ctx: &Arc<AlphaContext>, cutoff: u32, i: usize) -> Self {
        Self::unit_var(ctx, cutoff, ctx.dim() + i)
    }

    pub fn tau(ctx: &Arc<AlphaContext>, cutoff: u32, i: usize) -> Self {
        Self::unit_var(ctx, cutoff, 2 * ctx.dim() + i)
    }

    /// The coordinate function ω_i as a weight-0 series.
    pub fn omega(ctx: &Arc<AlphaContext>, cutoff: u32, i: usize) -> Self {
        Self::constant(ctx, cutoff, SmallDenomScalar::omega(ctx, i))
    }

    /// `f_i = p_i q_i - τ_i`, the generators of the ideal I.
    pub fn f_gen(ctx: &Arc<AlphaContext>, cutoff: u32, i: usize) -> Self {
        Self::p(ctx, cutoff, i)
            .mul(&Self::q(ctx, cutoff, i))
            .sub(&Self::tau(ctx, cutoff, i))
    }

    pub fn ctx(&self) -> &Arc<AlphaContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &SmallDenomScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&SmallDenomScalar> {
        self.terms.get(m)
    }

    /// Lowest weight present; `None` for zero (order +∞).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.weight)
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.weight)
    }

    pub fn add_term(&mut self, m: Monomial, c: SmallDenomScalar) {
        if m.weight > self.cutoff || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Same terms with a new cutoff (terms above it are dropped).
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        Self {
            ctx: self.ctx.clone(),
            cutoff,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.weight <= cutoff)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    fn accum(&self, other_cutoff: u32) -> Accum {
        Accum::new(self.dim(), self.cutoff.min(other_cutoff))
    }

    pub fn add(&self, o: &Self) -> Self {
        let cutoff = self.cutoff.min(o.cutoff);
        let mut acc = Accum::new(self.dim(), cutoff);
        for (m, c) in self.terms.iter().chain(o.terms.iter()) {
            acc.push(m.clone(), c);
        }
        acc.finish(self.ctx.clone())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn map_coeffs<F: Fn(&SmallDenomScalar) -> SmallDenomScalar>(&self, f: F) -> Self {
        Self {
            ctx: self.ctx.clone(),
            cutoff: self.cutoff,
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let v = f(c);
                    (!v.is_zero()).then(|| (m.clone(), v))
                })
                .collect(),
        }
    }

    pub fn scale(&self, k: &SmallDenomScalar) -> Self {
        self.map_coeffs(|c| c.mul(k))
    }

    pub fn scale_base(&self, k: &BaseNumber) -> Self {
        self.map_coeffs(|c| c.scale(k))
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(&self.ctx, self.cutoff);
        }
        self.map_coeffs(|c| c.scale_rational(k))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc = self.accum(o.cutoff);
        let one = rat(1);
        let cut = acc.cutoff;
        for (m1, c1) in &self.terms {
            if m1.weight > cut {
                break;
            }
            for (m2, c2) in &o.terms {
                if m1.weight + m2.weight > cut {
                    break;
                }
                acc.push_product(m1.mul(m2), c1, c2, &one);
            }
        }
        acc.finish(self.ctx.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(&self.ctx, self.cutoff, SmallDenomScalar::one(&self.ctx));
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// The Poisson bracket `Σ ∂q_i f ∂p_i g − ∂p_i f ∂q_i g`.
    pub fn bracket(&self, o: &Self) -> Self {
        let mut acc = self.accum(o.cutoff);
        let cut = acc.cutoff;
        let d = self.dim();
        for (m1, c1) in &self.terms {
            if m1.is_central() {
                continue;
            }
            for (m2, c2) in &o.terms {
                if m1.weight + m2.weight > cut + 2 {
                    break;
                }
                if m2.is_central() {
                    continue;
                }
                let prod = m1.mul(m2);
                for i in 0..d {
                    let k = i64::from(m1.b()[i]) * i64::from(m2.a()[i])
                        - i64::from(m1.a()[i]) * i64::from(m2.b()[i]);
                    if k == 0 {
                        continue;
                    }
                    // prod / (p_i q_i); both exponents are positive when k ≠ 0.
                    let (_, m) = prod.d_p(i).expect("p exponent");
                    let (_, m) = m.d_q(i).expect("q exponent");
                    acc.push_product(m, c1, c2, &rat(k));
                }
            }
        }
        acc.finish(self.ctx.clone())
    }

    fn derive_slot<F>(&self, lower: F) -> Self
    where
        F: Fn(&Monomial) -> Option<(u16, Monomial)>,
    {
        let mut acc = Accum::new(self.dim(), self.cutoff);
        for (m, c) in &self.terms {
            if let Some((e, m2)) = lower(m) {
                acc.push_scaled(m2, c, &rat(i64::from(e)));
            }
        }
        acc.finish(self.ctx.clone())
    }

    pub fn d_p(&self, i: usize) -> Self {
        self.derive_slot(|m| m.d_p(i))
    }

    pub fn d_q(&self, i: usize) -> Self {
        self.derive_slot(|m| m.d_q(i))
    }

    pub fn d_tau(&self, i: usize) -> Self {
        self.derive_slot(|m| m.d_tau(i))
    }

    /// ∂/∂ω_i acting on the coefficients.
    pub fn d_omega(&self, i: usize) -> Self {
        self.map_coeffs(|c| c.d_omega(i))
    }

    /// `[h]_lo^hi`: monomials with `lo <= weight < hi` (`hi = None` is ∞).
    pub fn truncate(&self, lo: u32, hi: Option<u32>) -> Self {
        Self {
            ctx: self.ctx.clone(),
            cutoff: self.cutoff,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.weight >= lo && hi.is_none_or(|h| m.weight < h))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Projection onto the Moser algebra (monomials with a = b).
    pub fn moser_project(&self) -> Self {
        self.filter(|m, _| m.is_moser())
    }

    pub fn filter<F: Fn(&Monomial, &SmallDenomScalar) -> bool>(&self, keep: F) -> Self {
        Self {
            ctx: self.ctx.clone(),
            cutoff: self.cutoff,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| keep(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_moser(&self) -> bool {
        self.terms.keys().all(Monomial::is_moser)
    }

    pub fn is_central(&self) -> bool {
        self.terms.keys().all(Monomial::is_central)
    }

    /// Writing `m = G(ω, τ, u)` with `u_i = p_i q_i`, returns the τ-series
    /// `(∂G/∂u_i)(ω, τ, τ)` for each i. All components vanish exactly when
    /// `m` lies in `R₀ + I²`.
    pub fn moser_linear_part(&self) -> Result<Vec<GradedSeries>, SeriesError> {
        let d = self.dim();
        if let Some((m, _)) = self.terms.iter().find(|(m, _)| !m.is_moser()) {
            return Err(SeriesError::NotInMoserAlgebra(m.to_canonical()));
        }
        let mut accs: Vec<Accum> = (0..d).map(|_| Accum::new(d, self.cutoff)).collect();
        for (m, c) in &self.terms {
            for (i, acc) in accs.iter_mut().enumerate() {
                let ai = m.a()[i];
                if ai == 0 {
                    continue;
                }
                let mut exps = vec![0u16; 3 * d];
                for k in 0..d {
                    exps[2 * d + k] = m.a()[k] + m.c()[k];
                }
                exps[2 * d + i] -= 1;
                acc.push_scaled(
                    Monomial::from_exps(exps.into_boxed_slice()),
                    c,
                    &rat(i64::from(ai)),
                );
            }
        }
        Ok(accs.into_iter().map(|a| a.finish(self.ctx.clone())).collect())
    }

    /// Splits every monomial as `x^k u^s τ^c` with `k = a − b`, `u_i = p_i q_i`,
    /// `x^k = p^{k⁺} q^{k⁻}`, and returns the value `x^k G_k(τ, τ)` and the
    /// linear parts `x^k ∂_{u_i} G_k(τ, τ)`. The series lies in `R₀ + I²`
    /// exactly when the value is central and every linear part vanishes.
    pub fn ideal_jet(&self) -> (GradedSeries, Vec<GradedSeries>) {
        let d = self.dim();
        let mut value = Accum::new(d, self.cutoff);
        let mut linear: Vec<Accum> = (0..d).map(|_| Accum::new(d, self.cutoff)).collect();
        for (m, c) in &self.terms {
            let mut base = vec![0u16; 3 * d];
            let mut s = vec![0u16; d];
            for i in 0..d {
                let (a, b) = (m.a()[i], m.b()[i]);
                s[i] = a.min(b);
                base[i] = a - s[i];
                base[d + i] = b - s[i];
                base[2 * d + i] = m.c()[i] + s[i];
            }
            value.push(Monomial::from_exps(base.clone().into_boxed_slice()), c);
            for (i, acc) in linear.iter_mut().enumerate() {
                if s[i] == 0 {
                    continue;
                }
                let mut e = base.clone();
                e[2 * d + i] -= 1;
                acc.push_scaled(Monomial::from_exps(e.into_boxed_slice()), c, &rat(i64::from(s[i])));
            }
        }
        (
            value.finish(self.ctx.clone()),
            linear.into_iter().map(|a| a.finish(self.ctx.clone())).collect(),
        )
    }

    /// Membership in `R₀ + I²`.
    pub fn in_center_plus_ideal_square(&self) -> bool {
        let (value, linear) = self.ideal_jet();
        value.is_central() && linear.iter().all(GradedSeries::is_zero)
    }

    /// `p^a q^a τ^c ↦ τ^{a+c}` on the Moser part; other monomials are dropped.
    pub fn moser_on_tau(&self) -> Self {
        let mut acc = Accum::new(self.dim(), self.cutoff);
        for (m, c) in &self.terms {
            if m.is_moser() {
                acc.push(m.moser_to_tau(), c);
            }
        }
        acc.finish(self.ctx.clone())
    }

    /// Sum of coefficients into a map for equality checks up to a weight.
    pub fn agrees_below(&self, o: &Self, bound: u32) -> bool {
        self.truncate(0, Some(bound)).terms == o.truncate(0, Some(bound)).terms
    }

    /// True when every coefficient is ω-free.
    pub fn is_omega_free(&self) -> bool {
        self.terms.values().all(SmallDenomScalar::is_omega_free)
    }

    /// Canonical text: sorted monomials with exact coefficients.
    pub fn to_canonical(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (m, c) in &self.terms {
            let cs = c.to_canonical();
            let atom = is_atom(&cs);
            let term = if m.weight == 0 {
                cs
            } else if c.as_constant().is_some_and(BaseNumber::is_one) {
                m.to_canonical()
            } else if cs == "-1" {
                format!("-{}", m.to_canonical())
            } else if atom {
                format!("{cs}*{}", m.to_canonical())
            } else {
                format!("({cs})*{}", m.to_canonical())
            };
            if out.is_empty() {
                out.push_str(&term);
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&term);
            }
        }
        out
    }
}

/// A coefficient string that can be juxtaposed with `*` without parentheses.
fn is_atom(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.chars().all(|ch| ch.is_ascii_digit() || ch == '/')
}

impl fmt::Debug for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[W={}] {}", self.cutoff, self.to_canonical())
    }
}

impl fmt::Display for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

#[cfg(test)]
mod tests;
