use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ConvergenceError;

/// A polynomial in `z_1..z_d` with complex double coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poly {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

impl Poly {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Result<Self, ConvergenceError> {
        if let Some((e, _)) = terms.iter().find(|(e, _)| e.len() != dim) {
            return Err(ConvergenceError::Range(format!("exponent {e:?} has the wrong length for d = {dim}")));
        }
        Ok(Self { dim, terms })
    }

    pub fn monomial(exponent: Vec<u32>, c: Complex64) -> Self {
        Self { dim: exponent.len(), terms: vec![(exponent, c)] }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(z).fold(*c, |acc, (&k, w)| acc * w.powu(k)))
            .sum()
    }

    /// `Σ |a_I| t^I`, an upper bound for the sup norm on the polydisc of radii `t`.
    pub fn majorant(&self, t: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(t).fold(c.norm(), |acc, (&k, r)| acc * r.powi(k as i32)))
            .sum()
    }

    /// Exact L² norm on the polydisc of radii `t`: `Σ |a_I|² ∏ π t_k^{2i_k+2}/(i_k+1)`.
    pub fn l2_norm(&self, t: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(t)
                    .fold(c.norm_sqr(), |acc, (&k, r)| acc * PI * r.powi(2 * k as i32 + 2) / (k as f64 + 1.0))
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn derivative(&self, j: &[u32]) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().zip(j).all(|(a, b)| a >= b))
            .map(|(e, c)| {
                let mut f = 1.0;
                for (&a, &b) in e.iter().zip(j) {
                    for m in 0..b {
                        f *= (a - m) as f64;
                    }
                }
                (e.iter().zip(j).map(|(a, b)| a - b).collect(), c * f)
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e, c) in &self.terms {
            for (f, d) in &other.terms {
                terms.push((e.iter().zip(f).map(|(a, b)| a + b).collect(), c * d));
            }
        }
        Self { dim: self.dim, terms }
    }

    fn extend(&mut self, other: Self, sign: f64) {
        self.terms.extend(other.terms.into_iter().map(|(e, c)| (e, c * sign)));
    }
}

/// `d(U, V)` for centred polydiscs: the largest r with `V + rD ⊂ U`.
pub fn polydisc_gap(t: &[f64], s: &[f64]) -> f64 {
    t.iter().zip(s).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
}

/// `δ(U, V)` for centred balls of radii `t > s` in any norm: the largest r
/// with `V + rB ⊂ U`.
pub fn ball_gap(t: f64, s: f64) -> f64 {
    t - s
}

/// A finite power series `Σ a_n z^n` with a declared radius of convergence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
    pub radius: f64,
}

impl PowerSeries {
    /// `1/(1−z)`, whose Borel transform is `e^z`.
    pub fn geometric(terms: usize) -> Self {
        Self { coeffs: vec![1.0; terms], radius: 1.0 }
    }

    /// `1/(1+z)`, whose Borel transform is `e^{−z}`.
    pub fn alternating(terms: usize) -> Self {
        Self { coeffs: (0..terms).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect(), radius: 1.0 }
    }

    /// `−z²/(1+z)²`, whose Borel transform is `e^{−z}(1+z) − 1`.
    pub fn phi_preimage(terms: usize) -> Self {
        let coeffs = (0..terms)
            .map(|n| if n < 2 { 0.0 } else { -(if n % 2 == 0 { 1.0 } else { -1.0 }) * (n as f64 - 1.0) })
            .collect();
        Self { coeffs, radius: 1.0 }
    }

    /// `−z/(1+z)`, whose Borel transform is `e^{−z} − 1`.
    pub fn psi_preimage(terms: usize) -> Self {
        let coeffs = (0..terms).map(|n| if n == 0 { 0.0 } else if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Self { coeffs, radius: 1.0 }
    }

    /// `|f|(x) = Σ |a_n| x^n`.
    pub fn abs_at(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelReport {
    pub x: f64,
    /// `Σ (|a_n|/n!) x^n n^n e^{−n}`, the bound on `‖𝓑f(u)‖` from the composition estimate.
    pub lhs_bound: f64,
    /// `|f|(x)`.
    pub rhs: f64,
    pub pass: bool,
}

/// Scalar form of the Borel estimate with `x = ‖u‖/(t−s)`.
pub fn borel_check(f: &PowerSeries, u_norm: f64, t: f64, s: f64) -> Result<BorelReport, ConvergenceError> {
    if !(t > s) {
        return Err(ConvergenceError::Range(format!("need t > s, got t = {t}, s = {s}")));
    }
    let x = u_norm / (t - s);
    if !(x < f.radius) {
        return Err(ConvergenceError::RadiusExceeded { x, radius: f.radius });
    }
    let mut lhs = 0.0;
    let mut ln_fact = 0.0;
    for (n, a) in f.coeffs.iter().enumerate() {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        if *a == 0.0 {
            continue;
        }
        // n^n e^{−n}/n! x^n, with 0^0 = 1.
        let w = if n == 0 { 1.0 } else { (n as f64 * ((n as f64).ln() - 1.0) - ln_fact).exp() * x.powi(n as i32) };
        lhs += a.abs() * w;
    }
    let rhs = f.abs_at(x);
    Ok(BorelReport { x, lhs_bound: lhs, rhs, pass: lhs <= rhs })
}

/// Exact polynomial with Gaussian-rational coefficients `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPoly {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, BigRational, BigRational)>,
}

impl RationalPoly {
    pub fn order(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, re, im)| !(re.is_zero() && im.is_zero()))
            .map(|(e, _, _)| e.iter().sum())
            .min()
    }

    /// `|f|² / π^d` on the polydisc of radius `t`: `Σ |a_I|² t^{2d+2|I|}/∏(1+i_k)`.
    fn scaled_norm_sq(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, re, im) in &self.terms {
            let mut c = re * re + im * im;
            let mut denom = BigRational::one();
            for &k in e {
                denom *= BigRational::from_integer((k + 1).into());
            }
            let deg: u32 = e.iter().sum::<u32>() + self.dim as u32;
            c *= pow(t, 2 * deg);
            acc += c / denom;
        }
        acc
    }
}

fn pow(x: &BigRational, n: u32) -> BigRational {
    num_traits::pow(x.clone(), n as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArnoldMoserReport {
    /// `|ρ(t,s)f|` and `(s/t)^{d+N}|f|`, as doubles.
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub equality: bool,
}

/// `|ρ(t,s)f| ≤ (s/t)^{d+N}|f|` for f vanishing to order N, decided exactly
/// on the squared norms.
pub fn arnold_moser_check(
    f: &RationalPoly,
    order: u32,
    t: &BigRational,
    s: &BigRational,
) -> Result<ArnoldMoserReport, ConvergenceError> {
    if !(s.is_positive() && s < t) {
        return Err(ConvergenceError::Range(format!("need 0 < s < t, got s = {s}, t = {t}")));
    }
    if let Some(found) = f.order() {
        if found < order {
            return Err(ConvergenceError::OrderMismatch { found, order });
        }
    }
    let lhs_sq = f.scaled_norm_sq(s);
    let factor_sq = pow(&(s / t), 2 * (f.dim as u32 + order));
    let rhs_sq = factor_sq * f.scaled_norm_sq(t);
    let scale = PI.powi(f.dim as i32);
    let to = |q: &BigRational| (q.to_f64().unwrap_or(f64::NAN) * scale).sqrt();
    Ok(ArnoldMoserReport {
        lhs: to(&lhs_sq),
        rhs: to(&rhs_sq),
        pass: lhs_sq <= rhs_sq,
        equality: lhs_sq == rhs_sq,
    })
}

/// A differential operator `Σ a_J ∂^J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffOperator {
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

impl DiffOperator {
    pub fn order(&self) -> u32 {
        self.terms.iter().map(|(j, _)| j.iter().sum()).max().unwrap_or(0)
    }

    pub fn sup_coefficient(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly { dim: f.dim, terms: Vec::new() };
        for (j, a) in &self.terms {
            let mut d = f.derivative(j);
            for (_, c) in d.terms.iter_mut() {
                *c *= a;
            }
            out.extend(d, 1.0);
        }
        out
    }
}

/// Outcome of a sampled sup-norm comparison. Sampling can only under-estimate
/// a supremum, so `pass` never certifies the inequality; a failure is a
/// genuine counterexample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledReport {
    pub check: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
    pub samples: usize,
    pub falsification_only: bool,
}

/// Largest `|g(z)|` over `samples` seeded points of the torus `|z_k| = r_k`.
/// Each sample has its own stream, so the result does not depend on how the
/// loop is split.
fn sampled_sup(g: &Poly, r: &[f64], samples: usize, seed: u64) -> f64 {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let z: Vec<Complex64> = r
                .iter()
                .map(|&rk| Complex64::from_polar(rk, rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            g.eval(&z).norm()
        })
        .reduce(|| 0.0, f64::max)
}

fn check_domains(t: &[f64], s: &[f64], dim: usize) -> Result<f64, ConvergenceError> {
    if t.len() != dim || s.len() != dim {
        return Err(ConvergenceError::Range(format!("polydisc radii must have length {dim}")));
    }
    let r = polydisc_gap(t, s);
    if !(r > 0.0) || s.iter().any(|x| !(*x > 0.0)) {
        return Err(ConvergenceError::Range(format!("need t > s > 0 coordinatewise, got gap {r}")));
    }
    Ok(r)
}

/// `sup_V |Pf| / |f|_U ≤ C k!/r^k` with `U, V` centred polydiscs of radii `t, s`.
///
/// `|f|_U` is replaced by the coefficient majorant `Σ|a_I|t^I ≥ |f|_U`, so the
/// observed ratio never exceeds the true one.
pub fn cauchy_nagumo_check(
    p: &DiffOperator,
    f: &Poly,
    t: &[f64],
    s: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SampledReport, ConvergenceError> {
    let r = check_domains(t, s, f.dim)?;
    let k = p.order();
    let k_fact: f64 = (1..=k).map(f64::from).product();
    let bound = p.sup_coefficient() * k_fact / r.powi(k as i32);
    let norm_u = f.majorant(t);
    let observed = if norm_u == 0.0 { 0.0 } else { sampled_sup(&p.apply(f), s, samples, seed) / norm_u };
    Ok(SampledReport {
        check: "cauchy_nagumo",
        observed,
        bound,
        pass: observed <= bound,
        samples,
        falsification_only: true,
    })
}

/// `{h, f} = Σ ∂_{q_i}h ∂_{p_i}f − ∂_{p_i}h ∂_{q_i}f` with coordinates
/// ordered `(q_1..q_m, p_1..p_m)`.
pub fn poisson_bracket(h: &Poly, f: &Poly) -> Poly {
    let m = h.dim / 2;
    let unit = |i: usize| {
        let mut e = vec![0u32; h.dim];
        e[i] = 1;
        e
    };
    let mut out = Poly { dim: h.dim, terms: Vec::new() };
    for i in 0..m {
        out.extend(h.derivative(&unit(i)).mul(&f.derivative(&unit(m + i))), 1.0);
        out.extend(h.derivative(&unit(m + i)).mul(&f.derivative(&unit(i))), -1.0);
    }
    out
}

/// `sup_V |{h,f}| / (|h|_U |f|_U) ≤ d/r²` with `d` the dimension of the
/// ambient space (twice the number of degrees of freedom).
pub fn hamiltonian_derivation_check(
    h: &Poly,
    f: &Poly,
    t: &[f64],
    s: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SampledReport, ConvergenceError> {
    if !h.dim.is_multiple_of(2) || h.dim != f.dim {
        return Err(ConvergenceError::Range("h and f need the same even dimension".into()));
    }
    let r = check_domains(t, s, f.dim)?;
    let bound = h.dim as f64 / (r * r);
    let norms = h.majorant(t) * f.majorant(t);
    let observed = if norms == 0.0 { 0.0 } else { sampled_sup(&poisson_bracket(h, f), s, samples, seed) / norms };
    Ok(SampledReport {
        check: "hamiltonian_derivation",
        observed,
        bound,
        pass: observed <= bound,
        samples,
        falsification_only: true,
    })
}

/// `sup_V |f| ≤ π^{−d/2} r^{−d} ‖f‖_{L²(U)}`.
pub fn local_equiv_check(
    f: &Poly,
    t: &[f64],
    s: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SampledReport, ConvergenceError> {
    let r = check_domains(t, s, f.dim)?;
    let d = f.dim as i32;
    let bound = PI.powf(-f64::from(d) / 2.0) * r.powi(-d) * f.l2_norm(t);
    let observed = sampled_sup(f, s, samples, seed);
    Ok(SampledReport {
        check: "local_equivalence",
        observed,
        bound,
        pass: observed <= bound,
        samples,
        falsification_only: true,
    })
}
