//! Invariant tori of elliptic fixed points at truncated order.
//!
//! A real Hamiltonian `½Σα_i(p_i²+q_i²) + O(3)` is carried to hyperbolic
//! form by the linear map `C(q, p) = (q + ip, p + iq)`, which multiplies the
//! Poisson bracket by 2; taking `H_h = ½ H_e∘C` keeps the flows conjugate and
//! turns the quadratic part into `Σ iα_i p_i q_i`. The normal form iteration
//! runs there, and the resulting polynomial maps are brought back to real
//! coordinates, integrated and compared against the predicted frequencies.

mod defect;
mod flow;
mod jet;
mod normalize;
mod poly;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::normalform::{NormalFormError, NormalFormProblem};
use crate::scalar::{AlphaContext, BaseNumber, SmallDenomScalar};
use crate::series::{GradedSeries, Monomial};

pub use defect::{
    defect_scaling, estimate_frequencies, tau_at_scale, torus_defect, FrequencyEstimate, ScalingReport,
    TorusConfig, TorusReport, TrajectoryReport, TrajectorySample,
};
pub use flow::{Integrator, IntegratorStats};
pub use normalize::{build_normalization, Normalization};
pub use poly::{substitute, RealPoly};

#[derive(Debug, Error)]
pub enum ToriError {
    #[error("not an elliptic problem: {0}")]
    NotElliptic(String),
    #[error("expected a real series, found complex coefficient in {0}")]
    NotReal(String),
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
    #[error("truncated inverse left its validity ball at t = {t}: |y| = {norm} > {radius}")]
    InverseDiverged { t: f64, norm: f64, radius: f64 },
    #[error("phase of mode {mode} jumps by {jump} rad between samples near t = {t}")]
    PhaseUnwrapAmbiguous { mode: usize, t: f64, jump: f64 },
    #[error("mode {0} sits at the fixed point, its phase is undefined")]
    DegenerateOrbit(usize),
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

/// A real Hamiltonian `½Σα_i(p_i²+q_i²) + O(3)` in q, p.
#[derive(Clone, Debug)]
pub struct EllipticProblem {
    ctx: Arc<AlphaContext>,
    hamiltonian: GradedSeries,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `½Σα_i(p_i²+q_i²)`.
pub fn elliptic_quadratic(ctx: &Arc<AlphaContext>, cutoff: u32) -> GradedSeries {
    let mut h = GradedSeries::zero(ctx, cutoff);
    for (i, a) in ctx.alpha().iter().enumerate() {
        let p = GradedSeries::p(ctx, cutoff, i);
        let q = GradedSeries::q(ctx, cutoff, i);
        h = h.add(&p.mul(&p).add(&q.mul(&q)).scale_base(a).scale_rational(&rat(1, 2)));
    }
    h
}

impl EllipticProblem {
    pub fn new(hamiltonian: GradedSeries) -> Result<Self, ToriError> {
        let ctx = hamiltonian.ctx().clone();
        if let Some(a) = ctx.alpha().iter().find(|a| !a.is_real_form() || a.is_zero()) {
            return Err(ToriError::NotElliptic(format!("frequency {a} is not a nonzero real")));
        }
        for (m, c) in hamiltonian.terms() {
            if m.c().iter().any(|&e| e > 0) {
                return Err(ToriError::NotElliptic(format!("τ-dependent term {}", m.to_canonical())));
            }
            match c.as_constant() {
                Some(b) if b.is_real_form() => {}
                _ => return Err(ToriError::NotReal(m.to_canonical())),
            }
        }
        if !hamiltonian.truncate(0, Some(2)).is_zero() {
            return Err(ToriError::NotElliptic("terms of weight below 2".into()));
        }
        let quad = hamiltonian.truncate(2, Some(3));
        let expect = elliptic_quadratic(&ctx, hamiltonian.cutoff());
        if quad != expect {
            return Err(ToriError::NotElliptic(format!("quadratic part {quad}, expected {expect}")));
        }
        Ok(Self { ctx, hamiltonian })
    }

    pub fn ctx(&self) -> &Arc<AlphaContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn hamiltonian(&self) -> &GradedSeries {
        &self.hamiltonian
    }

    pub fn cutoff(&self) -> u32 {
        self.hamiltonian.cutoff()
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        Self { ctx: self.ctx.clone(), hamiltonian: self.hamiltonian.with_cutoff(cutoff) }
    }
}

fn scaled_alpha(ctx: &AlphaContext, k: &BaseNumber) -> Arc<AlphaContext> {
    AlphaContext::new(ctx.field().clone(), ctx.alpha().iter().map(|a| a * k).collect())
}

/// `u + k·v` for coordinate series.
fn combine(u: &GradedSeries, v: &GradedSeries, k: &BaseNumber) -> GradedSeries {
    u.add(&v.scale_base(k))
}

/// `(q + ip, p + iq)` in `ctx`, as substitution lists for q and p.
pub(crate) fn forward_linear(ctx: &Arc<AlphaContext>, cutoff: u32) -> (Vec<GradedSeries>, Vec<GradedSeries>) {
    let i = BaseNumber::imag_unit(ctx.field());
    (0..ctx.dim())
        .map(|k| {
            let q = GradedSeries::q(ctx, cutoff, k);
            let p = GradedSeries::p(ctx, cutoff, k);
            (combine(&q, &p, &i), combine(&p, &q, &i))
        })
        .unzip()
}

/// `C⁻¹(Q, P) = ((Q − iP)/2, (P − iQ)/2)`.
pub(crate) fn inverse_linear(ctx: &Arc<AlphaContext>, cutoff: u32) -> (Vec<GradedSeries>, Vec<GradedSeries>) {
    let mi = -&BaseNumber::imag_unit(ctx.field());
    let half = rat(1, 2);
    (0..ctx.dim())
        .map(|k| {
            let q = GradedSeries::q(ctx, cutoff, k);
            let p = GradedSeries::p(ctx, cutoff, k);
            (combine(&q, &p, &mi).scale_rational(&half), combine(&p, &q, &mi).scale_rational(&half))
        })
        .unzip()
}

/// `H_h = ½ H_e(q + ip, p + iq)`; the quadratic part becomes `Σ iα_i p_i q_i`.
pub fn complexify(problem: &EllipticProblem) -> Result<NormalFormProblem, ToriError> {
    let i = BaseNumber::imag_unit(problem.ctx.field());
    let ctx = scaled_alpha(&problem.ctx, &i);
    let w = problem.cutoff();
    let (qs, ps) = forward_linear(&ctx, w);
    let tau: Vec<GradedSeries> = (0..ctx.dim()).map(|k| GradedSeries::tau(&ctx, w, k)).collect();
    let h = substitute(&problem.hamiltonian, &ctx, w, &qs, &ps, &tau).scale_rational(&rat(1, 2));
    Ok(NormalFormProblem::new(h)?)
}

/// Inverse of [`complexify`]: `H_e = 2 H_h((Q − iP)/2, (P − iQ)/2)`.
pub fn decomplexify(problem: &NormalFormProblem) -> Result<EllipticProblem, ToriError> {
    let mi = -&BaseNumber::imag_unit(problem.ctx().field());
    let ctx = scaled_alpha(problem.ctx(), &mi);
    let w = problem.cutoff();
    let (qs, ps) = inverse_linear(&ctx, w);
    let tau: Vec<GradedSeries> = (0..ctx.dim()).map(|k| GradedSeries::tau(&ctx, w, k)).collect();
    let h = substitute(problem.hamiltonian(), &ctx, w, &qs, &ps, &tau).scale_rational(&rat(2, 1));
    EllipticProblem::new(h)
}

/// The symmetry a hyperbolic series inherits from a real one:
/// `conj(c_{a,b,c}) = (−i)^{|a|+|b|} (−1)^{|c|} c_{b,a,c}` for the coefficient
/// of `p^a q^b τ^c`, with τ standing for `−(i/2)` times a real action.
pub fn satisfies_reality(h: &GradedSeries) -> bool {
    let field = h.ctx().field().clone();
    let mi = -&BaseNumber::imag_unit(&field);
    let zero = SmallDenomScalar::zero(h.dim());
    h.terms().all(|(m, c)| {
        let Some(c) = c.as_constant() else { return false };
        let mirror = Monomial::new(m.b(), m.a(), m.c());
        let other = h.coeff(&mirror).unwrap_or(&zero);
        let Some(other) = (if other.is_zero() { Some(BaseNumber::zero(&field)) } else { other.as_constant().cloned() })
        else {
            return false;
        };
        let pq: u32 = m.a().iter().chain(m.b()).map(|&e| u32::from(e)).sum();
        let t: u32 = m.c().iter().map(|&e| u32::from(e)).sum();
        let mut rhs = &mi.pow(pq) * &other;
        if t % 2 == 1 {
            rhs = -&rhs;
        }
        c.conj_i() == rhs
    })
}
