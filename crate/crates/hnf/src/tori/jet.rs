//! Truncated polynomials in `(ω, q, p, τ)` with base-field coefficients.
//!
//! The normalizing map is only ever evaluated at `ω = ω_n(τ)`, which has
//! weight at least 2, so giving ω weight 1 and expanding every small
//! denominator `1/(α+ω, J)` as a geometric series in ω loses nothing below
//! the cutoff. The derivations involved never lower this weight, which keeps
//! the truncation consistent, and the arithmetic stays in the base field.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::scalar::{AlphaContext, BaseField, BaseNumber, SmallDenomScalar};
use crate::series::{GradedSeries, Monomial, PoissonDerivation};

/// Slot layout `[ω_1..ω_d, q_1..q_d, p_1..p_d, τ_1..τ_d]`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Jet {
    d: usize,
    cutoff: u32,
    field: Arc<BaseField>,
    terms: BTreeMap<Box<[u16]>, BaseNumber>,
}

fn weight(d: usize, e: &[u16]) -> u32 {
    e.iter().enumerate().map(|(k, &x)| u32::from(x) * if k >= 3 * d { 2 } else { 1 }).sum()
}

impl Jet {
    pub fn zero(field: &Arc<BaseField>, d: usize, cutoff: u32) -> Self {
        Self { d, cutoff, field: field.clone(), terms: BTreeMap::new() }
    }

    fn push(&mut self, e: Box<[u16]>, c: BaseNumber) {
        if c.is_zero() || weight(self.d, &e) > self.cutoff {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.push(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BaseNumber) -> Self {
        let mut out = Self::zero(&self.field, self.d, self.cutoff);
        for (e, c) in &self.terms {
            out.push(e.clone(), c * k);
        }
        out
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        let mut out = Self::zero(&self.field, self.d, self.cutoff);
        for (e, c) in &self.terms {
            out.push(e.clone(), c.scale(k));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(&self.field, self.d, self.cutoff.min(o.cutoff));
        let ws: Vec<u32> = o.terms.keys().map(|e| weight(self.d, e)).collect();
        for (e1, c1) in &self.terms {
            let w1 = weight(self.d, e1);
            for ((e2, c2), w2) in o.terms.iter().zip(&ws) {
                if w1 + w2 > out.cutoff {
                    continue;
                }
                let e: Box<[u16]> = e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                out.push(e, c1 * c2);
            }
        }
        out
    }

    fn deriv(&self, slot: usize) -> Self {
        let mut out = Self::zero(&self.field, self.d, self.cutoff);
        for (e, c) in &self.terms {
            if e[slot] == 0 {
                continue;
            }
            let k = BigRational::from_integer(BigInt::from(e[slot]));
            let mut e2 = e.clone();
            e2[slot] -= 1;
            out.push(e2, c.scale(&k));
        }
        out
    }

    /// `Σ ∂q_i f ∂p_i g − ∂p_i f ∂q_i g`.
    pub fn bracket(&self, o: &Self) -> Self {
        let d = self.d;
        let mut out = Self::zero(&self.field, d, self.cutoff.min(o.cutoff));
        let minus = BigRational::from_integer(BigInt::from(-1));
        for i in 0..d {
            out = out.add(&self.deriv(d + i).mul(&o.deriv(2 * d + i)));
            out = out.add(&self.deriv(2 * d + i).mul(&o.deriv(d + i)).scale_rational(&minus));
        }
        out
    }

    /// Taylor expansion of a small-denominator scalar in ω up to `order`.
    pub fn from_scalar(x: &SmallDenomScalar, field: &Arc<BaseField>, d: usize, order: u32) -> Self {
        let mut num = Self::zero(field, d, order);
        for (exp, c) in x.numerator().terms() {
            let mut e = vec![0u16; 4 * d];
            for (slot, &k) in exp.iter().enumerate() {
                e[slot] = k as u16;
            }
            num.push(e.into_boxed_slice(), c.clone());
        }
        for (form, &mult) in x.denominator() {
            // 1/(c + J·ω) = c⁻¹ Σ_k (−J·ω/c)^k.
            let inv_c = form.value().inv().expect("resonance forms are nonzero");
            let mut step = Self::zero(field, d, order);
            for (slot, &j) in form.j().iter().enumerate() {
                let mut e = vec![0u16; 4 * d];
                e[slot] = 1;
                let k = BigRational::from_integer(BigInt::from(-j));
                step.push(e.into_boxed_slice(), inv_c.scale(&k));
            }
            let mut geo = Self::zero(field, d, order);
            let mut pow = Self::zero(field, d, order);
            pow.push(vec![0u16; 4 * d].into_boxed_slice(), BaseNumber::one(field));
            for _ in 0..=order {
                geo = geo.add(&pow);
                pow = pow.mul(&step);
            }
            let inv = geo.scale(&inv_c);
            for _ in 0..mult {
                num = num.mul(&inv);
            }
        }
        num
    }

    pub fn from_series(s: &GradedSeries, cutoff: u32) -> Self {
        let d = s.dim();
        let field = s.ctx().field().clone();
        let mut out = Self::zero(&field, d, cutoff);
        for (m, c) in s.terms() {
            let w = m.weight();
            if w > cutoff {
                continue;
            }
            let mut e = vec![0u16; 4 * d];
            e[d..2 * d].copy_from_slice(m.b());
            e[2 * d..3 * d].copy_from_slice(m.a());
            e[3 * d..].copy_from_slice(m.c());
            let mut mono = Self::zero(&field, d, cutoff);
            mono.push(e.into_boxed_slice(), BaseNumber::one(&field));
            out = out.add(&mono.mul(&Self::from_scalar(c, &field, d, cutoff - w).with_cutoff(cutoff)));
        }
        out
    }

    fn with_cutoff(mut self, cutoff: u32) -> Self {
        self.cutoff = cutoff;
        let d = self.d;
        self.terms.retain(|e, _| weight(d, e) <= cutoff);
        self
    }

    /// Substitute `ω = omega` (τ-series) and return a series in `ctx`.
    pub fn to_series(&self, ctx: &Arc<AlphaContext>, omega: &[GradedSeries]) -> GradedSeries {
        let d = self.d;
        let w = self.cutoff;
        let one = GradedSeries::constant(ctx, w, SmallDenomScalar::one(ctx));
        let mut powers: Vec<Vec<GradedSeries>> = omega.iter().map(|s| vec![one.clone(), s.with_cutoff(w)]).collect();
        let mut out = GradedSeries::zero(ctx, w);
        for (e, c) in &self.terms {
            let m = Monomial::new(&e[2 * d..3 * d], &e[d..2 * d], &e[3 * d..]);
            let mut term = GradedSeries::term(ctx, w, m, SmallDenomScalar::constant(d, c.clone()));
            for (i, &k) in e[..d].iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= usize::from(k) {
                    let next = table[table.len() - 1].mul(&table[1]);
                    table.push(next);
                }
                term = term.mul(&table[usize::from(k)]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Coordinate function `q_i` (`slot = i`) or `p_i` (`slot = d + i`).
    pub fn coordinate(field: &Arc<BaseField>, d: usize, cutoff: u32, slot: usize) -> Self {
        let mut e = vec![0u16; 4 * d];
        e[d + slot] = 1;
        let mut out = Self::zero(field, d, cutoff);
        out.push(e.into_boxed_slice(), BaseNumber::one(field));
        out
    }
}

/// A derivation `{−, h} + Σ A_i ∂ω_i + Σ B_i ∂τ_i` on jets.
pub(crate) struct JetDerivation {
    generator: Jet,
    d_omega: Vec<Jet>,
    d_tau: Vec<Jet>,
}

impl JetDerivation {
    pub fn from_derivation(v: &PoissonDerivation, cutoff: u32) -> Self {
        Self {
            generator: Jet::from_series(v.generator(), cutoff + 2),
            d_omega: v.d_omega().iter().map(|s| Jet::from_series(s, cutoff + 1)).collect(),
            d_tau: v.d_tau().iter().map(|s| Jet::from_series(s, cutoff + 2)).collect(),
        }
    }

    fn apply(&self, f: &Jet) -> Jet {
        let d = f.d;
        let mut out = f.bracket(&self.generator).with_cutoff(f.cutoff);
        for (i, a) in self.d_omega.iter().enumerate() {
            if !a.is_zero() {
                out = out.add(&a.mul(&f.deriv(i)).with_cutoff(f.cutoff));
            }
        }
        for (i, b) in self.d_tau.iter().enumerate() {
            if !b.is_zero() {
                out = out.add(&b.mul(&f.deriv(3 * d + i)).with_cutoff(f.cutoff));
            }
        }
        out
    }

    /// `e^{s·v} f` for `s = ±1`.
    pub fn exp(&self, f: &Jet, s: i64) -> Jet {
        let mut out = f.clone();
        let mut iterate = f.clone();
        let mut k = 1i64;
        // Each application raises the weight by at least one.
        while !iterate.is_zero() && k <= i64::from(f.cutoff) + 1 {
            iterate = self.apply(&iterate).scale_rational(&BigRational::new(BigInt::from(s), BigInt::from(k)));
            out = out.add(&iterate);
            k += 1;
        }
        out
    }
}
