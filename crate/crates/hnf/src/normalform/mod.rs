//! Normal form engines: the classical Birkhoff normalisation and the
//! Hamiltonian normal form iteration over the extended ring with unfolding
//! parameters ω and Moser variables τ.

mod birkhoff;
mod frequency;
mod iteration;
mod ledger;
mod linalg;
mod operators;

use std::sync::Arc;

use thiserror::Error;

use crate::scalar::AlphaContext;
use crate::series::{GradedSeries, SeriesError};

pub use birkhoff::{birkhoff_normal_form, BirkhoffResult, RemovalStrategy};
pub use frequency::{
    frequency_invariance_check, frequency_space, omega_eliminate, substitute_omega, FrequencyData,
    InvarianceReport, OmegaSolution,
};
pub use iteration::{hnf_init, hnf_kam_step, hnf_step, IterationState, KamStep};
pub use ledger::{Ledger, LedgerEntry};
pub use linalg::{in_span, rref};
pub use operators::{make_unfolding, op_j, op_l};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("monomial with resonance vector {0:?} is resonant: (alpha, a-b) = 0")]
    ResonantMonomial(Vec<i64>),
    #[error("A - A0 is not in (R0 + I^2) within the Moser algebra")]
    BadLowerPart,
    #[error("step {step} needs weight {needed}, beyond the cutoff {cutoff}")]
    CutoffExceeded { step: usize, needed: u32, cutoff: u32 },
    #[error("linear part of R_n in omega is not invertible")]
    NewtonNonUnit,
    #[error("Newton iteration for omega(tau) did not settle within {0} rounds")]
    NewtonStalled(usize),
    #[error("quadratic part does not match alpha: {0}")]
    QuadraticMismatch(String),
    #[error("Hamiltonian must be a series in q, p only: {0}")]
    NotAHamiltonian(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A Hamiltonian `Σ α_i p_i q_i + O(3)` in q, p with an exact frequency vector.
#[derive(Clone, Debug)]
pub struct NormalFormProblem {
    ctx: Arc<AlphaContext>,
    hamiltonian: GradedSeries,
}

impl NormalFormProblem {
    pub fn new(hamiltonian: GradedSeries) -> Result<Self, NormalFormError> {
        let ctx = hamiltonian.ctx().clone();
        if let Some((m, _)) = hamiltonian
            .terms()
            .find(|(m, c)| m.c().iter().any(|&e| e > 0) || !c.is_omega_free())
        {
            return Err(NormalFormError::NotAHamiltonian(m.to_canonical()));
        }
        if !hamiltonian.truncate(0, Some(2)).is_zero() {
            return Err(NormalFormError::QuadraticMismatch(
                "terms of weight below 2".into(),
            ));
        }
        let quad = hamiltonian.truncate(2, Some(3));
        let expect = quadratic_part(&ctx, hamiltonian.cutoff());
        if quad != expect {
            return Err(NormalFormError::QuadraticMismatch(format!(
                "expected {expect}, found {quad}"
            )));
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
}

/// `h₀ = Σ α_i p_i q_i`.
pub fn quadratic_part(ctx: &Arc<AlphaContext>, cutoff: u32) -> GradedSeries {
    let mut h = GradedSeries::zero(ctx, cutoff);
    for (i, a) in ctx.alpha().iter().enumerate() {
        let pq = GradedSeries::p(ctx, cutoff, i).mul(&GradedSeries::q(ctx, cutoff, i));
        h = h.add(&pq.scale_base(a));
    }
    h
}

/// True when `t` lies in `(R₀ + I²) ∩ M`.
pub fn in_trivial_part(t: &GradedSeries) -> bool {
    t.is_moser()
        && t
            .moser_linear_part()
            .map(|parts| parts.iter().all(GradedSeries::is_zero))
            .unwrap_or(false)
}
