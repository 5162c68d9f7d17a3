use serde::Serialize;

use super::ConvergenceError;
use crate::arithmetic::{absorb_rho, BoundClass, SequenceSpec};

/// Declared bounds for the operator families `|j|/(1+|T|)`, `|τ|` and `|σ|`,
/// a candidate `ρ` (as `log ρ_n`), the constant `R` and the range `n ≤ N`.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateBudget {
    pub j: BoundClass,
    pub tau: BoundClass,
    pub sigma: BoundClass,
    pub ln_rho: Vec<f64>,
    pub r: f64,
    pub n_max: usize,
}

/// The arithmetic data the bounds are evaluated against.
#[derive(Clone, Debug, Serialize)]
pub struct BudgetSetting {
    pub a: SequenceSpec,
    pub s0: f64,
    pub kappa: f64,
    /// `|A_0|` and `|B_0|` on the initial domain.
    pub a0_norm: f64,
    pub b0_norm: f64,
}

impl EstimateBudget {
    pub fn new(
        j: BoundClass,
        tau: BoundClass,
        sigma: BoundClass,
        ln_rho: Vec<f64>,
        r: f64,
        n_max: usize,
    ) -> Result<Self, ConvergenceError> {
        if ![j, tau, sigma].iter().all(BoundClass::is_strict) {
            return Err(ConvergenceError::Range("budget classes must have k > 0".into()));
        }
        if ln_rho.len() <= n_max || ln_rho.iter().any(|x| !(*x <= 0.0)) {
            return Err(ConvergenceError::Range(format!(
                "need log ρ_0..log ρ_{n_max}, each ≤ 0 (got {} terms)",
                ln_rho.len()
            )));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(ConvergenceError::Range(format!("R = {r} must be at least 1")));
        }
        Ok(Self { j, tau, sigma, ln_rho, r, n_max })
    }

    /// A candidate `ρ` absorbing each inequality separately: the pointwise
    /// minimum of the absorbing choices for
    /// `|j|/(a·gap)`, `|j||τ|/(a·gap)` and `|τ|` against `2^{−n}`, and for
    /// `|σ|`, `|σ||j|` against `e^{−κ^n}`.
    pub fn absorbed(
        j: BoundClass,
        tau: BoundClass,
        sigma: BoundClass,
        setting: &BudgetSetting,
        r: f64,
        n_max: usize,
    ) -> Result<Self, ConvergenceError> {
        let with_gap = |u: BoundClass| BoundClass { l: u.l + 1.0, m: u.m + 1.0, ..u };
        let product = |u: BoundClass, v: BoundClass| BoundClass {
            c: u.c * v.c,
            k: u.k + v.k,
            l: u.l + v.l,
            m: u.m + v.m,
        };
        let half = SequenceSpec::Geometric(0.5);
        let fast = SequenceSpec::DoubleExp(setting.kappa);
        let targets = [
            (with_gap(j), &half),
            (with_gap(product(j, tau)), &half),
            (tau, &half),
            (sigma, &fast),
            (product(sigma, j), &fast),
        ];
        let mut ln_rho = vec![0.0f64; n_max + 1];
        for (class, b) in targets {
            let abs = absorb_rho(&class, &setting.a, b, setting.s0, n_max, 128)?;
            for (slot, v) in ln_rho.iter_mut().zip(&abs.ln_rho) {
                *slot = slot.min(*v);
            }
        }
        Self::new(j, tau, sigma, ln_rho, r, n_max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub first_failure: Option<usize>,
    /// `log(rhs) − log(lhs)` per n; negative entries fail.
    pub margins: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BudgetReport {
    pub n_range: (usize, usize),
    pub r: f64,
    pub inequalities: Vec<InequalityReport>,
    /// Smallest `R ≥ 1` for which every numbered inequality holds on the range.
    pub required_r: f64,
    /// Whether (4) at n = 0 holding forces (1).
    pub one_implied_by_four: bool,
    pub a: bool,
    pub b: bool,
    /// `|B_0| ≤ R^{−2} e^{−1/(2−κ)}`, the starting condition the majorant needs.
    pub c: bool,
    /// `|B_0| ≤ R^{−2} e^{+1/(2−κ)}`, the weaker sign.
    pub c_weak: bool,
    pub first_failure: Option<usize>,
}

impl BudgetReport {
    pub fn all_pass(&self) -> bool {
        self.first_failure.is_none() && self.a && self.b && self.c
    }
}

/// `log(s_{n+lo} − s_{n+hi})` with `s_{n+ε} = ρ_n^{ε/2^n} s_n`, `0 ≤ lo < hi ≤ 1`.
fn ln_gap(ln_s: f64, ln_rho: f64, n: usize, lo: f64, hi: f64) -> f64 {
    let x = ln_rho * (-(n as f64)).exp2();
    ln_s + lo * x + (-((hi - lo) * x).exp_m1()).ln()
}

/// `log(C ρ^k a^{−l} (s_n − s_{n+1})^{−m})`.
fn ln_bound(u: &BoundClass, ln_rho: f64, ln_a: f64, ln_gap01: f64) -> f64 {
    if u.c == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut v = u.c.ln() + u.k * ln_rho - u.l * ln_a;
    if u.m != 0.0 {
        v -= u.m * ln_gap01;
    }
    v
}

/// Label, power of R on the right, and (lhs, rhs) per n.
type Row = (&'static str, u8, Vec<(f64, f64)>);

/// Evaluate both sides of the six numbered inequalities for `n ≤ N` and the
/// three conditions on `A_0`, `B_0`.
///
/// `|j_n|` itself is bounded by `(n+1)` times the `|j|/(1+|T|)` bound,
/// from `|T_n| ≤ n`.
pub fn budget_check(budget: &EstimateBudget, setting: &BudgetSetting) -> Result<BudgetReport, ConvergenceError> {
    let nm = budget.n_max;
    let ln_a = setting.a.ln_terms_f64(nm)?;
    let mut ln_s = vec![setting.s0.ln()];
    for n in 0..=nm {
        ln_s.push(ln_s[n] + budget.ln_rho[n] * (-(n as f64)).exp2());
    }
    let ln_r = budget.r.ln();
    let e_log = 1.0;
    // (lhs, rhs at R = 1, power of R on the right) per inequality and n.
    let mut rows: Vec<Row> = vec![
        ("1", 1, vec![]),
        ("2", 1, vec![]),
        ("3", 1, vec![]),
        ("4", 1, vec![]),
        ("5", 2, vec![]),
        ("6", 2, vec![]),
    ];
    for n in 0..=nm {
        let lr = budget.ln_rho[n];
        let g01 = ln_gap(ln_s[n], lr, n, 0.0, 1.0);
        let g_half_one = ln_gap(ln_s[n], lr, n, 0.5, 1.0);
        let g_quarter_half = ln_gap(ln_s[n], lr, n, 0.25, 0.5);
        let j = ln_bound(&budget.j, lr, ln_a[n], g01);
        let t = ln_bound(&budget.tau, lr, ln_a[n], g01);
        let s = ln_bound(&budget.sigma, lr, ln_a[n], g01);
        let np1 = ((n + 1) as f64).ln();
        let kn = setting.kappa.powi(n as i32);
        if n == 0 {
            rows[0].2.push((j, ln_a[0] + g_half_one - 2f64.ln()));
        }
        rows[1].2.push((j + t, ln_a[n] + g_quarter_half - 2f64.ln() - e_log - np1));
        rows[2].2.push((t, -2f64.ln()));
        rows[3].2.push((j, ln_a[n] + g_half_one - 8f64.ln() - np1));
        rows[4].2.push((s, -kn - 8f64.ln()));
        rows[5].2.push((s + j + np1, -kn - 8f64.ln() - np1));
    }
    let mut need: f64 = 0.0;
    let mut inequalities = Vec::new();
    for (name, power, vals) in &rows {
        let p = f64::from(*power);
        let margins: Vec<f64> = vals.iter().map(|(l, r1)| r1 + p * ln_r - l).collect();
        for (l, r1) in vals {
            need = need.max((l - r1) / p);
        }
        inequalities.push(InequalityReport {
            name,
            first_failure: margins.iter().position(|m| !(*m >= 0.0)),
            margins,
        });
    }
    let first_failure = inequalities.iter().filter_map(|i| i.first_failure).min();
    let four_at_zero = inequalities[3].margins[0] >= 0.0;
    let one_holds = inequalities[0].margins[0] >= 0.0;
    let inv_gap = 1.0 / (2.0 - setting.kappa);
    Ok(BudgetReport {
        n_range: (0, nm),
        r: budget.r,
        required_r: need.exp().max(1.0),
        one_implied_by_four: !four_at_zero || one_holds,
        a: setting.a0_norm <= 1.0,
        b: setting.b0_norm <= 1.0 / budget.r,
        c: setting.b0_norm <= budget.r.powi(-2) * (-inv_gap).exp(),
        c_weak: setting.b0_norm <= budget.r.powi(-2) * inv_gap.exp(),
        inequalities,
        first_failure,
    })
}
