//! Coefficient domains: the base field ℚ(θ)(i) and the ring of rational
//! functions of ω whose denominators are products of resonance forms.

mod field;
mod modp;
mod poly;
mod sd;

use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

pub use field::{BaseField, BaseNumber};
pub use poly::{OmegaExp, OmegaPoly};
pub use sd::{exact_point, SdSum, SmallDenomScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("bad minimal polynomial: {0}")]
    BadMinpoly(String),
    #[error("resonance form vanishes at alpha for J = {0:?}")]
    Resonant(Vec<i64>),
    #[error("resonance vector must be nonzero")]
    ZeroVector,
    #[error("divisor (alpha+omega, J) vanishes at the evaluation point for J = {0:?}")]
    DivisorVanishes(Vec<i64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// The frequency vector α together with its field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaContext {
    field: Arc<BaseField>,
    alpha: Vec<BaseNumber>,
}

impl AlphaContext {
    pub fn new(field: Arc<BaseField>, alpha: Vec<BaseNumber>) -> Arc<Self> {
        Arc::new(Self { field, alpha })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn field(&self) -> &Arc<BaseField> {
        &self.field
    }

    pub fn alpha(&self) -> &[BaseNumber] {
        &self.alpha
    }

    /// The exact pairing (α, J).
    pub fn pairing(&self, j: &[i64]) -> BaseNumber {
        let mut acc = BaseNumber::zero(&self.field);
        for (a, &k) in self.alpha.iter().zip(j) {
            if k != 0 {
                acc = &acc + &(a * &BaseNumber::from_i64(&self.field, k));
            }
        }
        acc
    }

    /// The resonance form along `j`, normalised to a primitive vector whose
    /// first nonzero entry is positive, with the integer `k` such that
    /// `(α+ω, j) = k · (α+ω, j/k)`.
    pub fn form(&self, j: &[i64]) -> Result<(ResonanceForm, i64), ScalarError> {
        if j.len() != self.dim() {
            return Err(ScalarError::Dimension {
                expected: self.dim(),
                got: j.len(),
            });
        }
        let Some(first) = j.iter().find(|&&x| x != 0) else {
            return Err(ScalarError::ZeroVector);
        };
        let g = j.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        let factor = first.signum() * g;
        let jn: Vec<i64> = j.iter().map(|x| x / factor).collect();
        let value = self.pairing(&jn);
        if value.is_zero() {
            return Err(ScalarError::Resonant(j.to_vec()));
        }
        Ok((ResonanceForm { j: jn, value }, factor))
    }
}

/// The linear form `(α+ω, J)` for a fixed nonzero J with `(α, J) ≠ 0`.
///
/// Forms are only built through [`AlphaContext::form`], which normalises the
/// sign of J; ordering and equality look at J alone.
#[derive(Clone, Debug)]
pub struct ResonanceForm {
    j: Vec<i64>,
    value: BaseNumber,
}

impl ResonanceForm {
    pub fn j(&self) -> &[i64] {
        &self.j
    }

    /// The exact constant term (α, J).
    pub fn value(&self) -> &BaseNumber {
        &self.value
    }

    /// `(α, J) + Σ J_k ω_k` as a polynomial.
    pub fn as_poly(&self) -> OmegaPoly {
        OmegaPoly::constant(self.j.len(), BaseNumber::one(self.value.field()))
            .mul_linear(&self.value, &self.j)
    }

    pub fn to_canonical(&self) -> String {
        let js: Vec<String> = self.j.iter().map(|x| x.to_string()).collect();
        format!("L[{}]", js.join(","))
    }
}

impl PartialEq for ResonanceForm {
    fn eq(&self, o: &Self) -> bool {
        self.j == o.j
    }
}
impl Eq for ResonanceForm {}
impl PartialOrd for ResonanceForm {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for ResonanceForm {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.j.cmp(&o.j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_forms_are_rejected() {
        let f = BaseField::rational();
        let ctx = AlphaContext::new(
            f.clone(),
            vec![BaseNumber::from_i64(&f, 1), BaseNumber::from_i64(&f, 2)],
        );
        assert_eq!(
            ctx.form(&[2, -1]).unwrap_err(),
            ScalarError::Resonant(vec![2, -1])
        );
        assert_eq!(ctx.form(&[0, 0]).unwrap_err(), ScalarError::ZeroVector);
        let (l, s) = ctx.form(&[-1, 1]).unwrap();
        assert_eq!((l.j(), s), (&[1i64, -1][..], -1));
        let (l, s) = ctx.form(&[-4, 6]).unwrap();
        assert_eq!((l.j(), s), (&[2i64, -3][..], -2));
    }
}
