use num_complex::Complex64;
use serde::Serialize;

use super::ArithError;

/// Norm used for lattice vectors J (and, dually, for perturbations).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeNorm {
    #[default]
    Linf,
    L1,
    L2,
}

impl LatticeNorm {
    /// The norm for which `|(x, J)| ≤ ‖x‖_dual ‖J‖`.
    pub fn dual(self) -> Self {
        match self {
            Self::Linf => Self::L1,
            Self::L1 => Self::Linf,
            Self::L2 => Self::L2,
        }
    }

    pub fn of(self, x: &[Complex64]) -> f64 {
        match self {
            Self::Linf => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Self::L1 => x.iter().map(|z| z.norm()).sum(),
            Self::L2 => x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Linf => "linf",
            Self::L1 => "l1",
            Self::L2 => "l2",
        }
    }
}

impl std::str::FromStr for LatticeNorm {
    type Err = ArithError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linf" | "inf" | "max" => Ok(Self::Linf),
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            other => Err(ArithError::BadParameter(format!("unknown norm {other:?}"))),
        }
    }
}

/// Limits on exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationBudget {
    pub max_k: u32,
    pub max_dim: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_k: 10, max_dim: 3 }
    }
}

impl EnumerationBudget {
    pub fn check(&self, dim: usize, k: u32) -> Result<(), ArithError> {
        if dim > self.max_dim || k > self.max_k || dim == 0 {
            return Err(ArithError::BudgetExceeded {
                dim,
                k,
                max_dim: self.max_dim,
                max_k: self.max_k,
            });
        }
        Ok(())
    }
}

/// Smallest `k` with `n <= 2^k`, for `n >= 1`.
fn ceil_log2(n: u64) -> u32 {
    64 - (n - 1).leading_zeros()
}

/// Level of J: the smallest k with ‖J‖ ≤ 2^k.
fn level(norm: LatticeNorm, j: &[i64]) -> u32 {
    match norm {
        LatticeNorm::Linf => ceil_log2(j.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)),
        LatticeNorm::L1 => ceil_log2(j.iter().map(|x| x.unsigned_abs()).sum()),
        LatticeNorm::L2 => {
            let sq: u64 = j.iter().map(|x| x.unsigned_abs().pow(2)).sum();
            ceil_log2(sq).div_ceil(2)
        }
    }
}

/// `|(β, J)|`, summed in coordinate order.
pub(crate) fn pairing_abs(beta: &[Complex64], j: &[i64]) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (b, &k) in beta.iter().zip(j) {
        re += b.re * k as f64;
        im += b.im * k as f64;
    }
    re.hypot(im)
}

/// `σ(β)_k = min { |(β,J)| : J ≠ 0, ‖J‖ ≤ 2^k }` for `k = 0..=k_max`.
///
/// All J in the box `‖J‖∞ ≤ 2^k_max` are visited once (one of ±J), each
/// credited to its level; a running minimum over levels gives σ.
pub fn sigma_sequence(
    beta: &[Complex64],
    k_max: u32,
    norm: LatticeNorm,
    budget: &EnumerationBudget,
) -> Result<Vec<f64>, ArithError> {
    let d = beta.len();
    budget.check(d, k_max)?;
    let radius = 1i64 << k_max;
    let mut best = vec![f64::INFINITY; k_max as usize + 1];
    // Odometer over the box; only the representative of ±J with a positive
    // first nonzero coordinate is scored.
    let mut j = vec![-radius; d];
    loop {
        if is_positive_representative(&j) {
            let lv = level(norm, &j);
            if lv <= k_max {
                let v = pairing_abs(beta, &j);
                let slot = &mut best[lv as usize];
                if v < *slot {
                    *slot = v;
                }
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(running_min(best));
            }
            i -= 1;
            if j[i] < radius {
                j[i] += 1;
                break;
            }
            j[i] = -radius;
        }
    }
}

fn is_positive_representative(j: &[i64]) -> bool {
    j.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn running_min(mut v: Vec<f64>) -> Vec<f64> {
    for k in 1..v.len() {
        if v[k - 1] < v[k] {
            v[k] = v[k - 1];
        }
    }
    v
}

pub(crate) fn real_vector(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&r| Complex64::new(r, 0.0)).collect()
}
