use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::lattice::{real_vector, sigma_sequence, EnumerationBudget, LatticeNorm};
use super::sequence::SequenceSpec;
use super::ArithError;

/// `σ(β)_k ≥ a_k` for each `k ≤ m`.
pub fn class_membership(
    beta: &[Complex64],
    a: &[f64],
    m: u32,
    norm: LatticeNorm,
    budget: &EnumerationBudget,
) -> Result<Vec<bool>, ArithError> {
    if a.len() <= m as usize {
        return Err(ArithError::BadParameter(format!(
            "need a_0..a_{m}, got {} terms",
            a.len()
        )));
    }
    let sigma = sigma_sequence(beta, m, norm, budget)?;
    Ok(sigma.iter().zip(a).map(|(s, a)| s >= a).collect())
}

/// Parameters `(α, a, ρ, s₀)` with the derived radii `s_{n+1} = ρ_n^{1/2^n} s_n`.
#[derive(Clone, Debug, Serialize)]
pub struct ArithParams {
    pub alpha: Vec<f64>,
    pub a: SequenceSpec,
    pub rho: SequenceSpec,
    pub s0: f64,
    /// Norm on lattice vectors J inside σ.
    pub sigma_norm: LatticeNorm,
    /// Norm defining the balls B(s) in ω-space.
    pub ball_norm: LatticeNorm,
    #[serde(skip)]
    budget: EnumerationBudget,
    a_terms: Vec<f64>,
    rho_terms: Vec<f64>,
    s: Vec<f64>,
}

impl ArithParams {
    /// Materialise everything needed for levels `n ≤ levels` (and `n + 1`).
    pub fn new(
        alpha: Vec<f64>,
        a: SequenceSpec,
        rho: SequenceSpec,
        s0: f64,
        levels: usize,
    ) -> Result<Self, ArithError> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(ArithError::BadParameter(format!("s0 = {s0} must be positive")));
        }
        let a_terms = a.terms(levels + 1)?;
        if a_terms.windows(2).any(|w| w[1] > w[0]) || a_terms.iter().any(|&x| x <= 0.0) {
            return Err(ArithError::BadSequence("a must be positive and non-increasing".into()));
        }
        let rho_terms = rho.terms(levels + 1)?;
        if rho_terms.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(ArithError::BadSequence("rho terms must lie in (0, 1)".into()));
        }
        let mut s = vec![s0];
        for (n, r) in rho_terms.iter().enumerate() {
            let next = s[n] * r.powf((-(n as f64)).exp2());
            s.push(next);
        }
        Ok(Self {
            alpha,
            a,
            rho,
            s0,
            sigma_norm: LatticeNorm::Linf,
            ball_norm: LatticeNorm::Linf,
            budget: EnumerationBudget::default(),
            a_terms,
            rho_terms,
            s,
        })
    }

    pub fn with_norms(mut self, sigma_norm: LatticeNorm, ball_norm: LatticeNorm) -> Self {
        self.sigma_norm = sigma_norm;
        self.ball_norm = ball_norm;
        self
    }

    pub fn levels(&self) -> usize {
        self.s.len() - 2
    }

    pub fn a_term(&self, n: usize) -> f64 {
        self.a_terms[n]
    }

    pub fn radius(&self, n: usize) -> f64 {
        self.s[n]
    }

    pub fn radii(&self) -> &[f64] {
        &self.s
    }

    /// `s₀ ∏_{k<terms} ρ_k^{1/2^k}`, summed in the log domain.
    pub fn radius_limit(&self, terms: usize) -> Result<f64, ArithError> {
        let rho = self.rho.terms(terms.saturating_sub(1))?;
        let log: f64 = rho
            .iter()
            .enumerate()
            .map(|(k, r)| r.ln() * (-(k as f64)).exp2())
            .sum();
        Ok(self.s0 * log.exp())
    }

    /// `ω ∈ Z_n`: `‖ω‖ ≤ s_n` and `σ(α+ω)_k ≥ a_k (s₀ − s_n)` for `k ≤ n`.
    pub fn zn_membership(&self, omega: &[Complex64], n: usize) -> Result<bool, ArithError> {
        if omega.len() != self.alpha.len() {
            return Err(ArithError::Dimension {
                expected: self.alpha.len(),
                got: omega.len(),
            });
        }
        if n >= self.s.len() {
            return Err(ArithError::BadParameter(format!(
                "level {n} beyond the {} materialised levels",
                self.s.len() - 1
            )));
        }
        if self.ball_norm.of(omega) > self.s[n] {
            return Ok(false);
        }
        let shifted: Vec<Complex64> = self
            .alpha
            .iter()
            .zip(omega)
            .map(|(a, w)| Complex64::new(*a, 0.0) + w)
            .collect();
        let sigma = sigma_sequence(&shifted, n as u32, self.sigma_norm, &self.budget)?;
        let scale = self.s0 - self.s[n];
        Ok(sigma.iter().zip(&self.a_terms).all(|(s, a)| *s >= a * scale))
    }

    /// `2^{−n} a_n (s_n − s_{n+1})`, the guaranteed gap between Z_{n+1} and
    /// the complement of Z_n.
    pub fn shrink_radius(&self, n: usize) -> f64 {
        (-(n as f64)).exp2() * self.a_terms[n] * (self.s[n] - self.s[n + 1])
    }

    /// Size of a perturbation: the larger of its ball norm and the norm dual
    /// to the lattice norm, so that both the radius and every
    /// `|(x, J)| ≤ ‖x‖·‖J‖` are controlled.
    pub fn gap_norm(&self, x: &[Complex64]) -> f64 {
        self.ball_norm.of(x).max(self.sigma_norm.dual().of(x))
    }

    /// Uniform real sample from the ball of radius `r`, by rejection from the cube.
    fn sample_ball(&self, rng: &mut ChaCha8Rng, r: f64) -> Vec<Complex64> {
        loop {
            let x: Vec<f64> = (0..self.alpha.len()).map(|_| rng.gen_range(-r..=r)).collect();
            let x = real_vector(&x);
            if self.ball_norm.of(&x) <= r {
                return x;
            }
        }
    }

    /// Draw `pairs` points ω ∈ Z_{n+1} and perturbations x with
    /// `gap_norm(x) ≤ shrink_radius(n)`, and count how often ω + x ∉ Z_n.
    pub fn shrink_check(&self, n: usize, pairs: usize, seed: u64) -> Result<ShrinkReport, ArithError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32));
        let radius = self.shrink_radius(n);
        let mut report = ShrinkReport {
            level: n,
            radius,
            pairs: 0,
            rejected: 0,
            violations: 0,
        };
        // Rejections are bounded so a nearly empty Z_{n+1} cannot hang the check.
        let max_draws = 200 * pairs.max(1);
        while report.pairs < pairs && report.pairs + report.rejected < max_draws {
            let omega = self.sample_ball(&mut rng, self.s[n + 1]);
            if !self.zn_membership(&omega, n + 1)? {
                report.rejected += 1;
                continue;
            }
            let dir = self.sample_ball(&mut rng, 1.0);
            let size = self.gap_norm(&dir);
            if size == 0.0 {
                continue;
            }
            let t: f64 = rng.gen_range(0.0..1.0);
            let x: Vec<Complex64> = dir.iter().map(|z| z * (t * radius / size)).collect();
            let moved: Vec<Complex64> = omega.iter().zip(&x).map(|(w, x)| w + x).collect();
            if !self.zn_membership(&moved, n)? {
                report.violations += 1;
            }
            report.pairs += 1;
        }
        Ok(report)
    }

    /// Sample ω ∈ B(s_{n+1}) and count members of Z_{n+1} outside Z_n.
    pub fn nesting_check(&self, n: usize, samples: usize, seed: u64) -> Result<(usize, usize), ArithError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members = 0;
        let mut violations = 0;
        for _ in 0..samples {
            let omega = self.sample_ball(&mut rng, self.s[n + 1]);
            if self.zn_membership(&omega, n + 1)? {
                members += 1;
                if !self.zn_membership(&omega, n)? {
                    violations += 1;
                }
            }
        }
        Ok((members, violations))
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ShrinkReport {
    pub level: usize,
    pub radius: f64,
    pub pairs: usize,
    /// Draws of ω that fell outside Z_{n+1}.
    pub rejected: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DensityEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub hits: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub level: u32,
    pub norm: LatticeNorm,
    /// Whether the centre itself satisfies the truncated class condition.
    pub centre_member: bool,
}

/// Fraction of the ball `B(β, ε)` (ℓ∞, real) lying in the class truncated at
/// level `m`, from `samples` seeded uniform draws.
#[allow(clippy::too_many_arguments)]
pub fn density_estimate(
    beta: &[f64],
    a: &[f64],
    epsilon: f64,
    m: u32,
    samples: usize,
    seed: u64,
    norm: LatticeNorm,
    budget: &EnumerationBudget,
) -> Result<DensityEstimate, ArithError> {
    if samples < 1000 {
        return Err(ArithError::BadParameter(format!("{samples} samples; at least 1000 required")));
    }
    if !(epsilon > 0.0) {
        return Err(ArithError::BadParameter(format!("epsilon = {epsilon} must be positive")));
    }
    budget.check(beta.len(), m)?;
    let member = |x: &[f64]| -> Result<bool, ArithError> {
        Ok(class_membership(&real_vector(x), a, m, norm, budget)?.iter().all(|&b| b))
    };
    let centre_member = member(beta)?;
    // One ChaCha stream per sample index, so any split of the index range
    // across threads draws the same points.
    let hits = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let x: Vec<f64> = beta.iter().map(|b| b + rng.gen_range(-epsilon..=epsilon)).collect();
            member(&x).map(usize::from)
        })
        .sum::<Result<usize, ArithError>>()?;
    let p = hits as f64 / samples as f64;
    Ok(DensityEstimate {
        fraction: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
        epsilon,
        level: m,
        norm,
        centre_member,
    })
}
