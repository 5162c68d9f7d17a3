//! Sparse polynomials in the detuning parameters ω₁..ω_d.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::field::{BaseField, BaseNumber};
use super::modp;

/// Exponent vector of an ω-monomial.
pub type OmegaExp = Vec<u32>;

/// Polynomial in ω with base-field coefficients; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OmegaPoly {
    dim: usize,
    terms: BTreeMap<OmegaExp, BaseNumber>,
}

impl OmegaPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BaseNumber) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The coordinate function ω_i.
    pub fn var(dim: usize, i: usize, field: &Arc<BaseField>) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::zero(dim);
        p.add_term(e, BaseNumber::one(field));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OmegaExp, &BaseNumber)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when the polynomial is constant (zero gives `None`).
    pub fn as_constant(&self) -> Option<&BaseNumber> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        e.iter().all(|&k| k == 0).then_some(c)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, e: OmegaExp, c: BaseNumber) {
        if c.is_zero() {
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

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BaseNumber) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.scale(k))).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if let Some(c) = o.as_constant() {
            return self.scale(c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale(c);
        }
        let mut r = Self::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: OmegaExp = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    /// Multiplication by the linear polynomial `c0 + Σ j_k ω_k`.
    pub fn mul_linear(&self, c0: &BaseNumber, j: &[i64]) -> Self {
        let mut r = self.scale(c0);
        for (k, &jk) in j.iter().enumerate() {
            if jk == 0 {
                continue;
            }
            let f = BigRational::from_integer(jk.into());
            for (e, c) in &self.terms {
                let mut e2 = e.clone();
                e2[k] += 1;
                r.add_term(e2, c.scale(&f));
            }
        }
        r
    }

    /// Whether `self` certainly does not vanish on `c0 + Σ j_k ω_k = 0`,
    /// judged at one point of that hyperplane modulo a prime.
    fn misses_hyperplane(&self, c0: &BaseNumber, j: &[i64], pivot: usize) -> bool {
        let Some(r) = c0.field().residue() else {
            return false;
        };
        let p = r.p;
        let Some(c0) = c0.reduce_mod(&r) else {
            return false;
        };
        let fold = |x: i64| if x < 0 { p - (x.unsigned_abs() % p) } else { x as u64 % p };
        let mut point = vec![0u64; self.dim];
        let mut rest = c0;
        for (k, &jk) in j.iter().enumerate() {
            if k != pivot {
                point[k] = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1) % p;
                rest = modp::add(rest, modp::mul(fold(jk), point[k], p), p);
            }
        }
        let Some(jp) = modp::inv(fold(j[pivot]), p) else {
            return false;
        };
        point[pivot] = modp::mul(p - rest, jp, p) % p;
        let mut acc = 0u64;
        for (e, c) in &self.terms {
            let Some(mut t) = c.reduce_mod(&r) else {
                return false;
            };
            for (&x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t = modp::mul(t, x, p);
                }
            }
            acc = modp::add(acc, t, p);
        }
        acc != 0
    }

    /// Exact division by `c0 + Σ j_k ω_k`, or `None` when it does not divide.
    pub fn div_linear(&self, c0: &BaseNumber, j: &[i64]) -> Option<Self> {
        let Some(pivot) = j.iter().rposition(|&x| x != 0) else {
            // Dividing by a nonzero constant.
            return c0.inv().map(|inv| self.scale(&inv));
        };
        if self.misses_hyperplane(c0, j, pivot) {
            return None;
        }
        let jp = BigRational::from_integer(j[pivot].into());
        let jp_inv = BigRational::from_integer(1.into()) / jp;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.dim);
        loop {
            // Highest power of the pivot variable still present.
            let lead = rem
                .terms
                .iter()
                .filter(|(e, _)| e[pivot] > 0)
                .max_by_key(|(e, _)| e[pivot])
                .map(|(e, c)| (e.clone(), c.clone()));
            let Some((e, c)) = lead else { break };
            let mut qe = e.clone();
            qe[pivot] -= 1;
            let qc = c.scale(&jp_inv);
            let mut t = Self::zero(self.dim);
            t.add_term(qe.clone(), qc.clone());
            for (e2, c2) in t.mul_linear(c0, j).terms {
                rem.add_term(e2, -c2);
            }
            quot.add_term(qe, qc);
        }
        // What remains is free of the pivot variable; it must vanish.
        rem.is_zero().then_some(quot)
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut r = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = BigRational::from_integer(e2[i].into());
            e2[i] -= 1;
            r.add_term(e2, c.scale(&k));
        }
        r
    }

    /// Evaluation with every coefficient mapped through `coef` into a ring `T`.
    pub fn eval_with<T, F>(&self, omega: &[T], zero: T, coef: F) -> T
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
        F: Fn(&BaseNumber) -> T,
    {
        let mut acc = zero;
        for (e, c) in &self.terms {
            let mut term = coef(c);
            for (k, &ek) in e.iter().enumerate() {
                for _ in 0..ek {
                    term = term * omega[k].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Canonical text, e.g. `2+(1/2*theta)*w1^2*w2`.
    pub fn to_canonical(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("w{}", i + 1)
                    } else {
                        format!("w{}^{k}", i + 1)
                    }
                })
                .collect();
            let cs = c.to_canonical();
            let s = if mono.is_empty() {
                cs
            } else if c.is_one() {
                mono.join("*")
            } else if c.term_count() == 1 && !cs.contains('*') {
                format!("{cs}*{}", mono.join("*"))
            } else {
                format!("({cs})*{}", mono.join("*"))
            };
            parts.push(s);
        }
        let mut out = String::new();
        for p in parts {
            if !out.is_empty() && !p.starts_with('-') {
                out.push('+');
            }
            out.push_str(&p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_division_round_trip() {
        let f = BaseField::sqrt(2).unwrap();
        let c0 = &BaseNumber::one(&f) - &BaseNumber::theta(&f);
        let j = [1, -1];
        let w1 = OmegaPoly::var(2, 0, &f);
        let w2 = OmegaPoly::var(2, 1, &f);
        let p = w1.mul(&w2).add(&OmegaPoly::constant(2, BaseNumber::from_i64(&f, 3)));
        let prod = p.mul_linear(&c0, &j);
        assert_eq!(prod.div_linear(&c0, &j), Some(p.clone()));
        assert_eq!(p.div_linear(&c0, &j), None);
    }

    #[test]
    fn derivative_lowers_degree() {
        let f = BaseField::rational();
        let w = OmegaPoly::var(1, 0, &f);
        let w2 = w.mul(&w);
        assert_eq!(w2.derivative(0), w.scale(&BaseNumber::from_i64(&f, 2)));
    }
}
