use std::sync::Arc;

use super::{in_trivial_part, Ledger, NormalFormError};
use crate::scalar::{AlphaContext, ScalarError, SmallDenomScalar};
use crate::series::{GradedSeries, PoissonDerivation};

/// `A₀ = Σ (α_i + ω_i) p_i q_i`.
pub fn make_unfolding(ctx: &Arc<AlphaContext>, cutoff: u32) -> GradedSeries {
    let mut a0 = GradedSeries::zero(ctx, cutoff);
    for (i, a) in ctx.alpha().iter().enumerate() {
        let coef = SmallDenomScalar::constant(ctx.dim(), a.clone()).add(&SmallDenomScalar::omega(ctx, i));
        let pq = GradedSeries::p(ctx, cutoff, i).mul(&GradedSeries::q(ctx, cutoff, i));
        a0 = a0.add(&pq.scale(&coef));
    }
    a0
}

/// The right inverse `L` of `v ↦ v(A₀)`.
///
/// Monomials with `a ≠ b` become generator terms divided by `(α+ω, a−b)`;
/// the Moser part becomes `Σ g_i ∂ω_i` with `g_i` its linear part along `f_i`.
pub fn op_l(m: &GradedSeries, ledger: &mut Ledger, step: &str) -> Result<PoissonDerivation, NormalFormError> {
    let ctx = m.ctx();
    let mut generator = GradedSeries::zero(ctx, m.cutoff());
    let mut moser = GradedSeries::zero(ctx, m.cutoff());
    for (mono, c) in m.terms() {
        if mono.is_moser() {
            moser.add_term(mono.clone(), c.clone());
            continue;
        }
        let j = mono.resonance();
        let inv = SmallDenomScalar::inv_pairing(ctx, &j).map_err(|e| match e {
            ScalarError::Resonant(_) => NormalFormError::ResonantMonomial(j.clone()),
            other => panic!("unexpected form error {other}"),
        })?;
        ledger.record(&j, &ctx.pairing(&j), step, mono);
        generator.add_term(mono.clone(), c.mul(&inv));
    }
    let d_omega = moser.moser_linear_part()?;
    let d_tau = vec![GradedSeries::zero(ctx, m.cutoff()); ctx.dim()];
    Ok(PoissonDerivation::new(generator, d_omega, d_tau))
}

/// `j_A(m) = L(m − (Lm)(T))` for `A = A₀ + T`.
pub fn op_j(
    a: &GradedSeries,
    m: &GradedSeries,
    ledger: &mut Ledger,
    step: &str,
) -> Result<PoissonDerivation, NormalFormError> {
    let t = a.sub(&make_unfolding(a.ctx(), a.cutoff()));
    if !in_trivial_part(&t) {
        return Err(NormalFormError::BadLowerPart);
    }
    let lm = op_l(m, ledger, step)?;
    if t.is_zero() {
        return Ok(lm);
    }
    let corrected = m.sub(&lm.apply(&t));
    op_l(&corrected, ledger, step)
}
