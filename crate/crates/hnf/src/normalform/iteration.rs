use super::operators::{make_unfolding, op_j};
use super::{Ledger, NormalFormError, NormalFormProblem};
use crate::series::{GradedSeries, PoissonDerivation};

/// One point `(F_n, A_n, B_n, T_n)` of the iteration with its history.
#[derive(Clone, Debug)]
pub struct IterationState {
    n: usize,
    unfolding: GradedSeries,
    f: GradedSeries,
    a: GradedSeries,
    b: GradedSeries,
    t: GradedSeries,
    increments: Vec<GradedSeries>,
    derivations: Vec<PoissonDerivation>,
}

/// Lower end of the active window at step n: `2^n + 2`.
fn window_lo(n: usize) -> u32 {
    (1u32 << n) + 2
}

impl IterationState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &GradedSeries {
        &self.f
    }

    pub fn a(&self) -> &GradedSeries {
        &self.a
    }

    pub fn b(&self) -> &GradedSeries {
        &self.b
    }

    pub fn t(&self) -> &GradedSeries {
        &self.t
    }

    pub fn unfolding(&self) -> &GradedSeries {
        &self.unfolding
    }

    /// `S_1, …, S_n`.
    pub fn increments(&self) -> &[GradedSeries] {
        &self.increments
    }

    /// `v_0, …, v_{n−1}`.
    pub fn derivations(&self) -> &[PoissonDerivation] {
        &self.derivations
    }

    pub fn cutoff(&self) -> u32 {
        self.f.cutoff()
    }

    /// `v_n = [j_{A_n}([F_n]_{2^n+2}^{2^{n+1}+2})]_{2^n}^{2^{n+1}}`.
    pub fn next_derivation(&self, ledger: &mut Ledger) -> Result<PoissonDerivation, NormalFormError> {
        next_derivation(self.n, &self.a, &self.f, ledger)
    }

    /// Push a series through `Φ_n = e^{−v_{n−1}} ⋯ e^{−v_0}`, applying `e^{−v_0}` first.
    pub fn transform(&self, g: &GradedSeries) -> Result<GradedSeries, NormalFormError> {
        let mut out = g.clone();
        for v in &self.derivations {
            out = v.neg().exp(&out)?;
        }
        Ok(out)
    }
}

fn check_window(n: usize, cutoff: u32) -> Result<(), NormalFormError> {
    let needed = window_lo(n);
    if needed > cutoff {
        return Err(NormalFormError::CutoffExceeded {
            step: n,
            needed,
            cutoff,
        });
    }
    Ok(())
}

fn next_derivation(
    n: usize,
    a: &GradedSeries,
    f: &GradedSeries,
    ledger: &mut Ledger,
) -> Result<PoissonDerivation, NormalFormError> {
    check_window(n, f.cutoff())?;
    let lo = window_lo(n);
    let hi = window_lo(n + 1);
    let m = f.truncate(lo, Some(hi));
    let v = op_j(a, &m, ledger, &format!("hnf:n={n}"))?;
    Ok(v.order_window(1 << n, 1 << (n + 1)))
}

/// `F₀ = H + Σ ω_i p_i q_i`, `A₀` its unfolded quadratic part, `n = 0`.
pub fn hnf_init(problem: &NormalFormProblem) -> IterationState {
    let ctx = problem.ctx();
    let cutoff = problem.cutoff();
    let unfolding = make_unfolding(ctx, cutoff);
    let mut f = problem.hamiltonian().clone();
    for i in 0..ctx.dim() {
        let pq = GradedSeries::p(ctx, cutoff, i).mul(&GradedSeries::q(ctx, cutoff, i));
        f = f.add(&pq.mul(&GradedSeries::omega(ctx, cutoff, i)));
    }
    let b = f.sub(&unfolding);
    IterationState {
        n: 0,
        a: unfolding.clone(),
        unfolding,
        f,
        b,
        t: GradedSeries::zero(ctx, cutoff),
        increments: Vec::new(),
        derivations: Vec::new(),
    }
}

/// The direct step `F_{n+1} = e^{−v_n} F_n`, `A_{n+1} = A_n + S_{n+1}`.
pub fn hnf_step(state: &IterationState, ledger: &mut Ledger) -> Result<IterationState, NormalFormError> {
    let n = state.n;
    let v = state.next_derivation(ledger)?;
    let s = state
        .f
        .sub(&v.apply(&state.f))
        .truncate(window_lo(n), Some(window_lo(n + 1)));
    let f = v.neg().exp(&state.f)?;
    let a = state.a.add(&s);
    let b = f.sub(&a);
    let mut increments = state.increments.clone();
    increments.push(s.clone());
    let mut derivations = state.derivations.clone();
    derivations.push(v);
    Ok(IterationState {
        n: n + 1,
        unfolding: state.unfolding.clone(),
        f,
        a,
        b,
        t: state.t.add(&s),
        increments,
        derivations,
    })
}

/// Output of one step in the KAM form.
#[derive(Clone, Debug)]
pub struct KamStep {
    pub a: GradedSeries,
    pub b: GradedSeries,
    pub s: GradedSeries,
    pub v: PoissonDerivation,
}

/// The step written in terms of `(A_n, B_n)` alone:
/// `B_{n+1} = ψ(v_n)S_{n+1} + φ(v_n)A_n + e^{−v_n}([B_n − v_n(A_n)]_{2^{n+1}+2})`.
pub fn hnf_kam_step(
    a: &GradedSeries,
    b: &GradedSeries,
    n: usize,
    ledger: &mut Ledger,
) -> Result<KamStep, NormalFormError> {
    let f = a.add(b);
    let v = next_derivation(n, a, &f, ledger)?;
    let lo = window_lo(n);
    let hi = window_lo(n + 1);
    let residual = b.sub(&v.apply(a));
    let s = residual.truncate(lo, Some(hi));
    let tail = residual.truncate(hi, None);
    let b_next = v
        .psi(&s)?
        .add(&v.phi(a)?)
        .add(&v.neg().exp(&tail)?);
    Ok(KamStep {
        a: a.add(&s),
        b: b_next,
        s,
        v,
    })
}
