use std::sync::Arc;

use serde::Serialize;

use super::ToriError;
use crate::scalar::{AlphaContext, SmallDenomScalar};
use crate::series::GradedSeries;

/// `f(q_sub, p_sub, tau_sub)` truncated at `cutoff`, built in `ctx`.
///
/// Coefficients of `f` are carried over unchanged, so they should be ω-free
/// or share `ctx`'s frequency vector.
pub fn substitute(
    f: &GradedSeries,
    ctx: &Arc<AlphaContext>,
    cutoff: u32,
    q_sub: &[GradedSeries],
    p_sub: &[GradedSeries],
    tau_sub: &[GradedSeries],
) -> GradedSeries {
    let one = GradedSeries::constant(ctx, cutoff, SmallDenomScalar::one(ctx));
    // Slot order matches the loop below: q, then p, then τ.
    let mut powers: Vec<Vec<GradedSeries>> = q_sub
        .iter()
        .chain(p_sub)
        .chain(tau_sub)
        .map(|s| vec![one.clone(), s.with_cutoff(cutoff)])
        .collect();
    let mut out = GradedSeries::zero(ctx, cutoff);
    for (m, c) in f.terms() {
        let mut term = GradedSeries::constant(ctx, cutoff, c.clone());
        for (slot, &e) in m.b().iter().chain(m.a()).chain(m.c()).enumerate() {
            if e == 0 {
                continue;
            }
            let table = &mut powers[slot];
            while table.len() <= usize::from(e) {
                let next = table[table.len() - 1].mul(&table[1]);
                table.push(next);
            }
            term = term.mul(&table[usize::from(e)]);
            if term.is_zero() {
                break;
            }
        }
        out = out.add(&term);
    }
    out
}

/// A real polynomial with `f64` coefficients.
///
/// Variables of a converted series are ordered `q_1..q_d, p_1..p_d, τ_1..τ_d`.
#[derive(Clone, Debug, Serialize)]
pub struct RealPoly {
    nvars: usize,
    terms: Vec<(Vec<u16>, f64)>,
}

impl RealPoly {
    pub fn from_series(s: &GradedSeries) -> Result<Self, ToriError> {
        let d = s.dim();
        let mut terms = Vec::with_capacity(s.len());
        for (m, c) in s.terms() {
            let v = c
                .as_constant()
                .filter(|b| b.is_real_form())
                .ok_or_else(|| ToriError::NotReal(m.to_canonical()))?;
            let exps: Vec<u16> = m.b().iter().chain(m.a()).chain(m.c()).copied().collect();
            terms.push((exps, v.to_complex().re));
        }
        Ok(Self { nvars: 3 * d, terms })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Vec<u16>, f64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut sum = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k != 0 {
                    t *= xi.powi(i32::from(k));
                }
            }
            sum += t;
        }
        sum
    }

    /// Fix the trailing `tail.len()` variables at the given values.
    pub fn fix_tail(&self, tail: &[f64]) -> RealPoly {
        let keep = self.nvars - tail.len();
        let mut merged: std::collections::BTreeMap<Vec<u16>, f64> = Default::default();
        for (e, c) in &self.terms {
            let mut v = *c;
            for (t, &k) in tail.iter().zip(&e[keep..]) {
                if k != 0 {
                    v *= t.powi(i32::from(k));
                }
            }
            *merged.entry(e[..keep].to_vec()).or_insert(0.0) += v;
        }
        RealPoly {
            nvars: keep,
            terms: merged.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }
}
