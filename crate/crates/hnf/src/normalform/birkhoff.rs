use super::frequency::{frequency_space, FrequencyData};
use super::{Ledger, NormalFormError, NormalFormProblem};
use crate::scalar::SmallDenomScalar;
use crate::series::{GradedSeries, Monomial, PoissonDerivation};

/// Order in which non-normal monomials are removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemovalStrategy {
    /// One generator per weight, removing the whole weight slice at once.
    DegreeByDegree,
    /// One generator per monomial, in canonical monomial order.
    MonomialAtATime,
}

#[derive(Clone, Debug)]
pub struct BirkhoffResult {
    pub frequency: FrequencyData,
    /// The normalised Hamiltonian in q, p (only `p^a q^a` terms remain).
    pub normal_form: GradedSeries,
    /// Generators `g_k` in application order; each step applies `e^{−{−,g_k}}`.
    pub generators: Vec<GradedSeries>,
}

/// `c·m / (α, a−b)` for the non-Moser terms of `slice`.
fn homological_generator(
    slice: &GradedSeries,
    ledger: &mut Ledger,
    step: &str,
) -> Result<GradedSeries, NormalFormError> {
    let ctx = slice.ctx();
    let mut g = GradedSeries::zero(ctx, slice.cutoff());
    for (m, c) in slice.terms() {
        if m.is_moser() {
            continue;
        }
        let j = m.resonance();
        let value = ctx.pairing(&j);
        if value.is_zero() {
            return Err(NormalFormError::ResonantMonomial(j));
        }
        ledger.record(&j, &value, step, m);
        g.add_term(m.clone(), c.div_base(&value).expect("nonzero pairing"));
    }
    Ok(g)
}

fn single(slice: &GradedSeries, m: &Monomial, c: &SmallDenomScalar) -> GradedSeries {
    GradedSeries::term(slice.ctx(), slice.cutoff(), m.clone(), c.clone())
}

/// Classical Birkhoff normalisation up to the problem cutoff.
pub fn birkhoff_normal_form(
    problem: &NormalFormProblem,
    strategy: RemovalStrategy,
    ledger: &mut Ledger,
) -> Result<BirkhoffResult, NormalFormError> {
    let cutoff = problem.cutoff();
    let mut h = problem.hamiltonian().clone();
    let mut generators = Vec::new();
    for k in 3..=cutoff {
        let slice = h.truncate(k, Some(k + 1)).filter(|m, _| !m.is_moser());
        if slice.is_zero() {
            continue;
        }
        let step = format!("bnf:w={k}");
        let pieces: Vec<GradedSeries> = match strategy {
            RemovalStrategy::DegreeByDegree => vec![slice.clone()],
            RemovalStrategy::MonomialAtATime => {
                slice.terms().map(|(m, c)| single(&slice, m, c)).collect()
            }
        };
        for piece in pieces {
            let g = homological_generator(&piece, ledger, &step)?;
            h = PoissonDerivation::hamiltonian(g.clone()).neg().exp(&h)?;
            generators.push(g);
        }
    }
    debug_assert!(h.is_moser());
    let bnf = h.moser_on_tau();
    let gradient: Vec<GradedSeries> = (0..problem.dim()).map(|i| bnf.d_tau(i)).collect();
    let basis = frequency_space(&gradient, cutoff);
    Ok(BirkhoffResult {
        frequency: FrequencyData {
            bnf,
            gradient,
            basis,
        },
        normal_form: h,
        generators,
    })
}
