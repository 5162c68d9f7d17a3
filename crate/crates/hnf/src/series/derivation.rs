use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GradedSeries, SeriesError};
use crate::scalar::AlphaContext;

/// A derivation `{−, h} + Σ A_i ∂ω_i + Σ B_i ∂τ_i` of the extended ring.
///
/// The order counts how much the derivation raises weight: the generator
/// contributes `weight − 2`, an ∂ω coefficient its weight, a ∂τ coefficient
/// `weight − 2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PoissonDerivation {
    generator: GradedSeries,
    d_omega: Vec<GradedSeries>,
    d_tau: Vec<GradedSeries>,
}

impl PoissonDerivation {
    pub fn zero(ctx: &Arc<AlphaContext>, cutoff: u32) -> Self {
        let z = GradedSeries::zero(ctx, cutoff);
        Self {
            generator: z.clone(),
            d_omega: vec![z.clone(); ctx.dim()],
            d_tau: vec![z; ctx.dim()],
        }
    }

    pub fn hamiltonian(generator: GradedSeries) -> Self {
        let mut v = Self::zero(generator.ctx(), generator.cutoff());
        v.generator = generator;
        v
    }

    pub fn new(generator: GradedSeries, d_omega: Vec<GradedSeries>, d_tau: Vec<GradedSeries>) -> Self {
        assert_eq!(d_omega.len(), generator.dim());
        assert_eq!(d_tau.len(), generator.dim());
        Self {
            generator,
            d_omega,
            d_tau,
        }
    }

    /// `coeff · ∂ω_i`.
    pub fn omega_direction(i: usize, coeff: GradedSeries) -> Self {
        let mut v = Self::zero(coeff.ctx(), coeff.cutoff());
        v.d_omega[i] = coeff;
        v
    }

    /// `coeff · ∂τ_i`.
    pub fn tau_direction(i: usize, coeff: GradedSeries) -> Self {
        let mut v = Self::zero(coeff.ctx(), coeff.cutoff());
        v.d_tau[i] = coeff;
        v
    }

    pub fn generator(&self) -> &GradedSeries {
        &self.generator
    }

    pub fn d_omega(&self) -> &[GradedSeries] {
        &self.d_omega
    }

    pub fn d_tau(&self) -> &[GradedSeries] {
        &self.d_tau
    }

    pub fn is_zero(&self) -> bool {
        self.generator.is_zero()
            && self.d_omega.iter().all(GradedSeries::is_zero)
            && self.d_tau.iter().all(GradedSeries::is_zero)
    }

    /// The weight raise, or `None` for the zero derivation.
    pub fn order(&self) -> Option<i64> {
        let g = self.generator.order().map(|w| i64::from(w) - 2);
        let a = self.d_omega.iter().filter_map(|s| s.order().map(i64::from));
        let b = self.d_tau.iter().filter_map(|s| s.order().map(|w| i64::from(w) - 2));
        g.into_iter().chain(a).chain(b).min()
    }

    /// Highest weight raise present.
    pub fn max_order(&self) -> Option<i64> {
        let g = self.generator.max_weight().map(|w| i64::from(w) - 2);
        let a = self.d_omega.iter().filter_map(|s| s.max_weight().map(i64::from));
        let b = self.d_tau.iter().filter_map(|s| s.max_weight().map(|w| i64::from(w) - 2));
        g.into_iter().chain(a).chain(b).max()
    }

    /// Keep the components whose weight raise lies in `[lo, hi)`.
    pub fn order_window(&self, lo: u32, hi: u32) -> Self {
        Self {
            generator: self.generator.truncate(lo + 2, Some(hi + 2)),
            d_omega: self.d_omega.iter().map(|s| s.truncate(lo, Some(hi))).collect(),
            d_tau: self.d_tau.iter().map(|s| s.truncate(lo + 2, Some(hi + 2))).collect(),
        }
    }

    fn zip_with<F: Fn(&GradedSeries, &GradedSeries) -> GradedSeries>(&self, o: &Self, f: F) -> Self {
        Self {
            generator: f(&self.generator, &o.generator),
            d_omega: self.d_omega.iter().zip(&o.d_omega).map(|(x, y)| f(x, y)).collect(),
            d_tau: self.d_tau.iter().zip(&o.d_tau).map(|(x, y)| f(x, y)).collect(),
        }
    }

    fn map<F: Fn(&GradedSeries) -> GradedSeries>(&self, f: F) -> Self {
        Self {
            generator: f(&self.generator),
            d_omega: self.d_omega.iter().map(&f).collect(),
            d_tau: self.d_tau.iter().map(&f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip_with(o, GradedSeries::add)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip_with(o, GradedSeries::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(GradedSeries::neg)
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        self.map(|s| s.scale_rational(k))
    }

    /// `{f, h} + Σ A_i ∂ω_i f + Σ B_i ∂τ_i f`.
    pub fn apply(&self, f: &GradedSeries) -> GradedSeries {
        let mut out = f.bracket(&self.generator).with_cutoff(f.cutoff());
        // Only the part of f that stays below the cutoff after multiplying by
        // a coefficient of weight `w` is worth differentiating.
        let low = |w: u32, extra: u32| match (f.cutoff() + extra).checked_sub(w) {
            Some(top) => f.truncate(0, Some(top + 1)),
            None => GradedSeries::zero(f.ctx(), f.cutoff()),
        };
        for (i, a) in self.d_omega.iter().enumerate() {
            if let Some(w) = a.order() {
                out = out.add(&a.mul(&low(w, 0).d_omega(i)));
            }
        }
        for (i, b) in self.d_tau.iter().enumerate() {
            if let Some(w) = b.order() {
                out = out.add(&b.mul(&low(w, 2).d_tau(i)));
            }
        }
        out.with_cutoff(f.cutoff())
    }

    /// `Σ_k c_k v^k(f)` for `k ≥ k0`, stopping when the iterate vanishes.
    pub fn apply_series<C>(&self, f: &GradedSeries, k0: usize, coeff: C) -> Result<GradedSeries, SeriesError>
    where
        C: Fn(usize) -> BigRational,
    {
        if self.is_zero() {
            let c = coeff(0);
            return Ok(if k0 == 0 { f.scale_rational(&c) } else { GradedSeries::zero(f.ctx(), f.cutoff()) });
        }
        let ord = self.order().unwrap_or(1);
        if ord < 1 {
            return Err(SeriesError::NonPositiveOrder(ord));
        }
        let mut out = GradedSeries::zero(f.ctx(), f.cutoff());
        let mut iterate = f.clone();
        let mut k = 0usize;
        while !iterate.is_zero() {
            if k >= k0 {
                let c = coeff(k);
                if !c.is_zero() {
                    out = out.add(&iterate.scale_rational(&c));
                }
            }
            iterate = self.apply(&iterate);
            k += 1;
        }
        Ok(out)
    }

    /// `e^v f = Σ v^k f / k!`.
    pub fn exp(&self, f: &GradedSeries) -> Result<GradedSeries, SeriesError> {
        self.apply_series(f, 0, |k| BigRational::new(BigInt::one(), factorial(k)))
    }

    /// `ψ(v) f` with `ψ(z) = e^{−z} − 1`.
    pub fn psi(&self, f: &GradedSeries) -> Result<GradedSeries, SeriesError> {
        self.apply_series(f, 1, |k| BigRational::new(sign(k), factorial(k)))
    }

    /// `φ(v) f` with `φ(z) = e^{−z}(1 + z) − 1`.
    pub fn phi(&self, f: &GradedSeries) -> Result<GradedSeries, SeriesError> {
        self.apply_series(f, 2, |k| {
            BigRational::new(sign(k) * BigInt::from(1 - k as i64), factorial(k))
        })
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn sign(k: usize) -> BigInt {
    if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}
