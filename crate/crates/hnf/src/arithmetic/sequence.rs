use std::fmt;
use std::str::FromStr;

use astro_float::BigFloat;
use serde::Serialize;

use super::lattice::{real_vector, sigma_sequence, EnumerationBudget, LatticeNorm};
use super::ArithError;
use crate::precise::HighPrecision;

/// A positive sequence `(a_n)_{n≥0}` given in closed form or by its terms.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    /// `a_n = q^n`.
    Geometric(f64),
    /// `a_n = e^{−κ^n}`.
    DoubleExp(f64),
    /// Explicit terms; indexing past the end is an error.
    List(Vec<f64>),
    /// `a_k = ν_k σ(β)_k` with `ν_k = 2^{−(k+1)·exponent}` (ℓ∞ lattice norm).
    NuSigma { beta: Vec<f64>, exponent: f64 },
}

impl SequenceSpec {
    fn validate(&self) -> Result<(), ArithError> {
        let bad = |m: String| Err(ArithError::BadSequence(m));
        match self {
            Self::Geometric(q) if !(q.is_finite() && *q > 0.0) => bad(format!("geometric ratio {q} must be positive")),
            Self::DoubleExp(k) if !(k.is_finite() && *k > 0.0) => bad(format!("doubleexp exponent {k} must be positive")),
            Self::List(v) if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) => {
                bad("list terms must be positive and finite".into())
            }
            Self::NuSigma { beta, .. } if beta.is_empty() => bad("nu_sigma needs a nonempty beta".into()),
            _ => Ok(()),
        }
    }

    /// Terms `a_0..=a_n`.
    pub fn terms(&self, n: usize) -> Result<Vec<f64>, ArithError> {
        self.validate()?;
        match self {
            Self::Geometric(q) => Ok((0..=n).map(|k| q.powi(k as i32)).collect()),
            Self::DoubleExp(kappa) => Ok((0..=n).map(|k| (-kappa.powi(k as i32)).exp()).collect()),
            Self::List(v) => {
                if v.len() <= n {
                    return Err(ArithError::BadSequence(format!(
                        "list has {} terms, {} needed",
                        v.len(),
                        n + 1
                    )));
                }
                Ok(v[..=n].to_vec())
            }
            Self::NuSigma { beta, exponent } => {
                let sigma = sigma_sequence(
                    &real_vector(beta),
                    n as u32,
                    LatticeNorm::Linf,
                    &EnumerationBudget::default(),
                )?;
                Ok(sigma
                    .iter()
                    .enumerate()
                    .map(|(k, s)| s * (-(k as f64 + 1.0) * exponent).exp2())
                    .collect())
            }
        }
    }

    /// Natural logarithms of `a_0..=a_n` at the precision of `hp`.
    ///
    /// Closed forms are evaluated directly; other terms enter through their
    /// double values.
    pub fn ln_terms(&self, n: usize, hp: &mut HighPrecision) -> Result<Vec<BigFloat>, ArithError> {
        match self {
            Self::Geometric(q) => {
                self.validate()?;
                let lq = hp.ln(&hp.num(*q));
                Ok((0..=n).map(|k| hp.mul(&lq, &hp.int(k as i64))).collect())
            }
            Self::DoubleExp(kappa) => {
                self.validate()?;
                let k = hp.num(*kappa);
                Ok((0..=n).map(|i| hp.powi(&k, i).neg()).collect())
            }
            _ => {
                let t = self.terms(n)?;
                Ok(t.iter().map(|x| hp.ln(&hp.num(*x))).collect())
            }
        }
    }
}

impl SequenceSpec {
    /// `log a_0..=log a_n` in double precision; closed forms stay finite
    /// where the terms themselves underflow.
    pub fn ln_terms_f64(&self, n: usize) -> Result<Vec<f64>, ArithError> {
        self.validate()?;
        match self {
            Self::Geometric(q) => Ok((0..=n).map(|k| k as f64 * q.ln()).collect()),
            Self::DoubleExp(kappa) => Ok((0..=n).map(|k| -kappa.powi(k as i32)).collect()),
            _ => Ok(self.terms(n)?.iter().map(|a| a.ln()).collect()),
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric(q) => write!(f, "geometric({q})"),
            Self::DoubleExp(k) => write!(f, "doubleexp({k})"),
            Self::List(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list[{}]", items.join(","))
            }
            Self::NuSigma { beta, exponent } => {
                let items: Vec<String> = beta.iter().map(|x| x.to_string()).collect();
                write!(f, "nu_sigma([{}],{exponent})", items.join(","))
            }
        }
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_list(body: &str) -> Result<Vec<f64>, ArithError> {
    body.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| ArithError::BadSequence(format!("bad number {:?}", t.trim())))
        })
        .collect()
}

impl FromStr for SequenceSpec {
    type Err = ArithError;

    /// `geometric(q)`, `doubleexp(kappa)`, `list[a0, a1, ...]` or
    /// `nu_sigma([b1, ..., bd], exponent)`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || ArithError::BadSequence(format!("cannot parse {text:?}"));
        let inner = |prefix: &str, open: char, close: char| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix(open))
                .and_then(|r| r.strip_suffix(close))
                .map(str::to_string)
        };
        let spec = if let Some(b) = inner("geometric", '(', ')') {
            Self::Geometric(b.parse().map_err(|_| bad())?)
        } else if let Some(b) = inner("doubleexp", '(', ')') {
            Self::DoubleExp(b.parse().map_err(|_| bad())?)
        } else if let Some(b) = inner("list", '[', ']') {
            Self::List(parse_list(&b)?)
        } else if let Some(b) = inner("nu_sigma", '(', ')') {
            let (vec, exp) = b.rsplit_once(',').ok_or_else(bad)?;
            let vec = vec.strip_prefix('[').and_then(|v| v.strip_suffix(']')).ok_or_else(bad)?;
            Self::NuSigma {
                beta: parse_list(vec)?,
                exponent: exp.parse().map_err(|_| bad())?,
            }
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BrunoVerdict {
    Bruno,
    NotBruno,
    /// Only partial sums are known for this kind of sequence.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct BrunoReport {
    pub sequence: SequenceSpec,
    /// `Σ_{k≤n} |log a_k| / 2^k` for `n = 0..=N`.
    pub partial_sums: Vec<f64>,
    pub verdict: BrunoVerdict,
    /// The full sum when it has a closed form.
    pub limit: Option<f64>,
    /// Whether the sequence decreases to zero, for closed forms.
    pub falling: Option<bool>,
    pub terms_checked: usize,
}

/// Partial Bruno sums, with a verdict for the closed forms.
pub fn bruno_report(spec: &SequenceSpec, n: usize) -> Result<BrunoReport, ArithError> {
    let logs = spec.ln_terms_f64(n)?;
    let mut acc = 0.0;
    let partial_sums = logs
        .iter()
        .enumerate()
        .map(|(k, l)| {
            acc += l.abs() / (k as f64).exp2();
            acc
        })
        .collect();
    let (verdict, limit, falling) = match spec {
        // Σ k|log q|/2^k = 2|log q|.
        SequenceSpec::Geometric(q) => (BrunoVerdict::Bruno, Some(2.0 * q.ln().abs()), Some(*q < 1.0)),
        // Σ (κ/2)^k converges exactly when κ < 2.
        SequenceSpec::DoubleExp(kappa) if *kappa < 2.0 => {
            (BrunoVerdict::Bruno, Some(1.0 / (1.0 - kappa / 2.0)), Some(*kappa > 1.0))
        }
        SequenceSpec::DoubleExp(kappa) => (BrunoVerdict::NotBruno, None, Some(*kappa > 1.0)),
        _ => (BrunoVerdict::Inconclusive, None, None),
    };
    Ok(BrunoReport {
        sequence: spec.clone(),
        partial_sums,
        verdict,
        limit,
        falling,
        terms_checked: n + 1,
    })
}
