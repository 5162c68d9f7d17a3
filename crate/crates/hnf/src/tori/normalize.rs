use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::jet::{Jet, JetDerivation};
use super::poly::{substitute, RealPoly};
use super::{complexify, inverse_linear, EllipticProblem, ToriError};
use crate::normalform::{
    hnf_init, hnf_step, in_trivial_part, omega_eliminate, substitute_omega, IterationState, Ledger,
    NormalFormProblem, OmegaSolution,
};
use crate::scalar::{AlphaContext, BaseNumber};
use crate::series::GradedSeries;

/// The truncated normalizing map of an elliptic problem and its frequency polynomial.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub cutoff: u32,
    pub steps: usize,
    pub hyperbolic: NormalFormProblem,
    pub state: IterationState,
    pub solution: OmegaSolution,
    pub ledger: Ledger,
    /// `Ψ_h(τ, q, p)` as the images of `q_1..q_d, p_1..p_d`.
    pub map_h: Vec<GradedSeries>,
    pub inverse_h: Vec<GradedSeries>,
    /// `iα + ω_n(τ)`.
    pub frequency_h: Vec<GradedSeries>,
    /// `H_h∘Ψ_h − Σ β_{h,i} p_i q_i`.
    pub remainder: GradedSeries,
    /// Whether the remainder lies in `R₀ + I²` at the cutoff.
    pub certified: bool,
    /// The same maps in real coordinates, τ now the real actions.
    pub map: Vec<GradedSeries>,
    pub inverse: Vec<GradedSeries>,
    /// `β_N(τ)`.
    pub frequency: Vec<GradedSeries>,
    pub map_f64: Vec<RealPoly>,
    pub inverse_f64: Vec<RealPoly>,
    pub frequency_f64: Vec<RealPoly>,
    /// `H_e` as a polynomial in `(q, p)`.
    pub hamiltonian_f64: RealPoly,
    /// `(∂H/∂p, −∂H/∂q)` in `(q, p)`.
    pub vector_field: Vec<RealPoly>,
    pub separable: bool,
}

fn coordinates(ctx: &Arc<AlphaContext>, w: u32) -> Vec<GradedSeries> {
    let d = ctx.dim();
    (0..d)
        .map(|k| GradedSeries::q(ctx, w, k))
        .chain((0..d).map(|k| GradedSeries::p(ctx, w, k)))
        .collect()
}

/// `τ_h = −(i/2) τ` as substitution list.
fn tau_to_real(ctx: &Arc<AlphaContext>, w: u32) -> Vec<GradedSeries> {
    let k = BaseNumber::from_parts(
        ctx.field(),
        [
            BigRational::from_integer(BigInt::from(0)),
            BigRational::from_integer(BigInt::from(0)),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
            BigRational::from_integer(BigInt::from(0)),
        ],
    );
    (0..ctx.dim()).map(|i| GradedSeries::tau(ctx, w, i).scale_base(&k)).collect()
}

/// `C∘Ψ∘C⁻¹` for a map given by the images of `(q, p)`.
fn to_real_map(components: &[GradedSeries], ctx: &Arc<AlphaContext>, w: u32) -> Vec<GradedSeries> {
    let d = ctx.dim();
    let (qs, ps) = inverse_linear(ctx, w);
    let tau = tau_to_real(ctx, w);
    let s: Vec<GradedSeries> = components.iter().map(|c| substitute(c, ctx, w, &qs, &ps, &tau)).collect();
    let i = BaseNumber::imag_unit(ctx.field());
    let q_out = (0..d).map(|k| s[k].add(&s[d + k].scale_base(&i)));
    let p_out = (0..d).map(|k| s[d + k].add(&s[k].scale_base(&i)));
    q_out.chain(p_out).collect()
}

/// Inverse of `x ↦ Ψ(τ, x)` at fixed τ, by `y ← x − (Ψ − id)(y)`; each pass
/// fixes one more weight since `Ψ − id` starts at weight 2.
fn revert(map: &[GradedSeries], ctx: &Arc<AlphaContext>, w: u32) -> Vec<GradedSeries> {
    let d = ctx.dim();
    let id = coordinates(ctx, w);
    let tau: Vec<GradedSeries> = (0..d).map(|k| GradedSeries::tau(ctx, w, k)).collect();
    let tail: Vec<GradedSeries> = map.iter().zip(&id).map(|(m, x)| m.sub(x)).collect();
    let mut y = id.clone();
    for _ in 0..w {
        let next: Vec<GradedSeries> =
            tail.iter().zip(&id).map(|(t, x)| x.sub(&substitute(t, ctx, w, &y[..d], &y[d..], &tau))).collect();
        if next == y {
            break;
        }
        y = next;
    }
    y
}

fn to_f64(series: &[GradedSeries]) -> Result<Vec<RealPoly>, ToriError> {
    series.iter().map(RealPoly::from_series).collect()
}

/// Run the normal form iteration for `steps` steps at cutoff `cutoff` and
/// assemble `Ψ_N`, its truncated inverse and `β_N`.
pub fn build_normalization(problem: &EllipticProblem, cutoff: u32, steps: usize) -> Result<Normalization, ToriError> {
    if steps >= 31 || (1u32 << steps) + 2 <= cutoff {
        return Err(ToriError::Range(format!("{steps} steps leave weights below {cutoff} unnormalized; need 2^n + 2 > N")));
    }
    let problem = problem.with_cutoff(cutoff);
    let hyperbolic = complexify(&problem)?;
    let hctx = hyperbolic.ctx().clone();
    let d = hctx.dim();
    let w = cutoff;

    let mut ledger = Ledger::new();
    let mut state = hnf_init(&hyperbolic);
    for _ in 0..steps {
        state = hnf_step(&state, &mut ledger)?;
    }
    let solution = omega_eliminate(&state, w)?;

    // Φ_n(x) = e^{−v_{n−1}}⋯e^{−v_0}(x) as coordinate functions, restricted to ω = ω_n(τ).
    let field = hctx.field();
    let jets: Vec<JetDerivation> = state.derivations().iter().map(|v| JetDerivation::from_derivation(v, w)).collect();
    let map_h: Vec<GradedSeries> = (0..2 * d)
        .map(|slot| {
            let x = Jet::coordinate(field, d, w, slot);
            jets.iter().fold(x, |f, v| v.exp(&f, -1)).to_series(&hctx, &solution.omega)
        })
        .collect();
    let inverse_h = revert(&map_h, &hctx, w);
    let frequency_h = solution.frequency.clone();

    let mut remainder = substitute_omega(state.f(), &solution.omega, w);
    for (k, b) in frequency_h.iter().enumerate() {
        let pq = GradedSeries::p(&hctx, w, k).mul(&GradedSeries::q(&hctx, w, k));
        remainder = remainder.sub(&pq.mul(b));
    }
    let certified = in_trivial_part(&remainder);

    let ectx = problem.ctx().clone();
    let map = to_real_map(&map_h, &ectx, w);
    let inverse = to_real_map(&inverse_h, &ectx, w);
    let tau = tau_to_real(&ectx, w);
    let mi = -&BaseNumber::imag_unit(ectx.field());
    let id = coordinates(&ectx, w);
    let frequency: Vec<GradedSeries> = frequency_h
        .iter()
        .map(|b| substitute(b, &ectx, w, &id[..d], &id[d..], &tau).scale_base(&mi))
        .collect();

    let h = problem.hamiltonian();
    let vf: Vec<GradedSeries> = (0..d).map(|k| h.d_p(k)).chain((0..d).map(|k| h.d_q(k).neg())).collect();
    let separable = h.terms().all(|(m, _)| m.a().iter().all(|&e| e == 0) || m.b().iter().all(|&e| e == 0));

    Ok(Normalization {
        cutoff,
        steps,
        map_f64: to_f64(&map)?,
        inverse_f64: to_f64(&inverse)?,
        frequency_f64: to_f64(&frequency)?,
        hamiltonian_f64: RealPoly::from_series(h)?.fix_tail(&vec![0.0; d]),
        vector_field: to_f64(&vf)?.iter().map(|p| p.fix_tail(&vec![0.0; d])).collect(),
        separable,
        hyperbolic,
        state,
        solution,
        ledger,
        map_h,
        inverse_h,
        frequency_h,
        remainder,
        certified,
        map,
        inverse,
        frequency,
    })
}

impl Normalization {
    pub fn dim(&self) -> usize {
        self.map.len() / 2
    }

    /// `Ψ_N(τ, −)` as polynomials in `(q, p)`.
    pub fn map_at(&self, tau: &[f64]) -> Vec<RealPoly> {
        self.map_f64.iter().map(|p| p.fix_tail(tau)).collect()
    }

    pub fn inverse_at(&self, tau: &[f64]) -> Vec<RealPoly> {
        self.inverse_f64.iter().map(|p| p.fix_tail(tau)).collect()
    }

    /// `β_N(τ)`.
    pub fn predicted_frequencies(&self, tau: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.frequency_f64
            .iter()
            .map(|p| {
                let mut x = vec![0.0; 2 * d];
                x.extend_from_slice(tau);
                p.eval(&x)
            })
            .collect()
    }
}
