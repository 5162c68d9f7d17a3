use astro_float::BigFloat;
use serde::Serialize;

use super::ConvergenceError;
use crate::precise::HighPrecision;

/// Starting value shared by the three recursions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// `R^{−2} e^{−1/(2−κ)}`.
    Threshold,
    /// A multiple of the threshold.
    Scaled(f64),
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantParams {
    pub r: f64,
    pub kappa: f64,
    pub start: StartMode,
    pub n_max: usize,
    pub bits: usize,
}

impl MajorantParams {
    pub fn new(r: f64, kappa: f64, start: StartMode, n_max: usize) -> Self {
        Self { r, kappa, start, n_max, bits: 256 }
    }

    pub fn with_bits(mut self, bits: usize) -> Self {
        self.bits = bits;
        self
    }

    fn validate(&self) -> Result<(), ConvergenceError> {
        if !(self.kappa > 1.5 && self.kappa < 2.0) {
            return Err(ConvergenceError::Range(format!("kappa = {} outside (3/2, 2)", self.kappa)));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(ConvergenceError::Range(format!("R = {} must be at least 1", self.r)));
        }
        let max_n = if self.bits < 128 { 60 } else { 400 };
        if self.n_max > max_n {
            return Err(ConvergenceError::Range(format!(
                "N = {} exceeds {max_n} at {} bits",
                self.n_max, self.bits
            )));
        }
        match self.start {
            StartMode::Scaled(f) | StartMode::Value(f) if !(f >= 0.0 && f.is_finite()) => {
                Err(ConvergenceError::Range(format!("start value {f} must be finite and nonnegative")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub first_failure: Option<usize>,
}

impl Verdict {
    fn from_failures(mut failures: impl Iterator<Item = usize>) -> Self {
        let first_failure = failures.next();
        Self { holds: first_failure.is_none(), first_failure }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantRun {
    pub params: MajorantParams,
    /// `x_0 = y_0 = z_0`.
    pub start: f64,
    pub ln_start: f64,
    /// Natural logarithms (−∞ for an exact zero) of the three sequences.
    pub ln_x: Vec<f64>,
    pub ln_y: Vec<f64>,
    pub ln_z: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Largest `|z_n^{closed}/z_n^{rec} − 1|`.
    pub closed_form_error: f64,
    /// (i) closed form agrees with the recursion to 1e-12.
    pub closed_form: Verdict,
    /// (ii) `y_n ≥ e^{−2κ^n}`.
    pub y_lower_bound: Verdict,
    pub y_started_at_threshold: bool,
    /// `R² e^{1/(2−κ)} z_0 ≤ 1`.
    pub condition_c: bool,
    /// (iii) `z_n` strictly decreasing and below `R^{−2}(R²e^{1/(2−κ)}z_0)^{2^n}`.
    pub decrease: Verdict,
    /// First `n` at which `z_n > 1` while increasing.
    pub divergence: Option<usize>,
    /// `x_n ≤ y_n` for every n.
    pub x_below_y: Verdict,
    /// `y_n ≤ z_n`, checked while `y_k ≥ e^{−2κ^k}` has held for all `k < n`.
    pub y_below_z: Verdict,
}

const CLOSED_FORM_TOL: f64 = 1e-12;

struct Logs<'a> {
    hp: &'a mut HighPrecision,
    cutoff: BigFloat,
}

impl Logs<'_> {
    /// `log(e^a + e^b)`.
    fn add_exp(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let gap = self.hp.sub(lo, hi);
        if gap < self.cutoff {
            return hi.clone();
        }
        let e = self.hp.exp(&gap);
        let one = self.hp.int(1);
        let l = self.hp.ln(&self.hp.add(&one, &e));
        self.hp.add(hi, &l)
    }
}

/// Run the three scalar recursions
/// `x_{n+1} = (R²/2)(x_n² + e^{−κ^n}x_n)`,
/// `y_{n+1} = (R²/2)(e^{κ^n}y_n² + e^{−κ^n}y_n)`,
/// `z_{n+1} = R² e^{κ^n} z_n²`
/// in the log domain, and compare `z` with its closed form
/// `z_n = R^{2^{n+1}−2} e^{β_n} z_0^{2^n}`.
pub fn majorant_run(params: &MajorantParams) -> Result<MajorantRun, ConvergenceError> {
    params.validate()?;
    let mut hp = HighPrecision::new(params.bits);
    let nm = params.n_max;
    let kappa = hp.num(params.kappa);
    let ln_r = hp.ln(&hp.num(params.r));
    let two_ln_r = hp.mul(&hp.int(2), &ln_r);
    let ln2 = hp.ln(&hp.int(2));
    let inv_gap = hp.div(&hp.int(1), &hp.sub(&hp.int(2), &kappa));
    // ln threshold = −2 ln R − 1/(2−κ).
    let ln_threshold = hp.sub(&two_ln_r.neg(), &inv_gap);
    let ln_start = match params.start {
        StartMode::Threshold => Some(ln_threshold.clone()),
        StartMode::Scaled(f) | StartMode::Value(f) if f == 0.0 => None,
        StartMode::Scaled(f) => {
            let lf = hp.ln(&hp.num(f));
            Some(hp.add(&ln_threshold, &lf))
        }
        StartMode::Value(v) => Some(hp.ln(&hp.num(v))),
    };
    let kpow: Vec<BigFloat> = (0..=nm).map(|n| hp.powi(&kappa, n)).collect();
    let beta: Vec<f64> = (0..=nm).map(|n| beta_n(params.kappa, n)).collect();
    let gamma: Vec<f64> = (0..=nm).map(|n| gamma_n(params.kappa, n)).collect();

    let Some(ln0) = ln_start else {
        let zeros = vec![f64::NEG_INFINITY; nm + 1];
        let ok = Verdict { holds: true, first_failure: None };
        return Ok(MajorantRun {
            params: params.clone(),
            start: 0.0,
            ln_start: f64::NEG_INFINITY,
            ln_x: zeros.clone(),
            ln_y: zeros.clone(),
            ln_z: zeros,
            beta,
            gamma,
            closed_form_error: 0.0,
            closed_form: ok.clone(),
            y_lower_bound: Verdict { holds: false, first_failure: Some(0) },
            y_started_at_threshold: false,
            condition_c: true,
            // Constant zero is not strictly decreasing.
            decrease: Verdict { holds: nm == 0, first_failure: (nm > 0).then_some(1) },
            divergence: None,
            x_below_y: ok.clone(),
            y_below_z: ok,
        });
    };

    let cutoff = hp.mul(&hp.int(-(params.bits as i64) - 16), &ln2);
    let mut logs = Logs { hp: &mut hp, cutoff };
    let mut x = vec![ln0.clone()];
    let mut y = vec![ln0.clone()];
    let mut z = vec![ln0.clone()];
    let pre = logs.hp.sub(&two_ln_r, &ln2);
    for n in 0..nm {
        let hp = &*logs.hp;
        let x2 = hp.mul(&hp.int(2), &x[n]);
        let xl = hp.sub(&x[n], &kpow[n]);
        let y2 = hp.add(&hp.mul(&hp.int(2), &y[n]), &kpow[n]);
        let yl = hp.sub(&y[n], &kpow[n]);
        let zn = hp.add(&hp.add(&two_ln_r, &kpow[n]), &hp.mul(&hp.int(2), &z[n]));
        let xs = logs.add_exp(&x2, &xl);
        let ys = logs.add_exp(&y2, &yl);
        x.push(logs.hp.add(&pre, &xs));
        y.push(logs.hp.add(&pre, &ys));
        z.push(zn);
    }

    // Closed form: ln z_n = (2^{n+1} − 2) ln R + β_n + 2^n ln z_0.
    let mut closed_form_error: f64 = 0.0;
    let mut cf_fail = Vec::new();
    let half_kappa = hp.div(&kappa, &hp.int(2));
    let one = hp.int(1);
    let denom = hp.sub(&one, &half_kappa);
    for n in 0..=nm {
        let p2 = hp.powi(&hp.int(2), n);
        let head = hp.div(&p2, &hp.int(2));
        let b = hp.div(&hp.mul(&head, &hp.sub(&one, &hp.powi(&half_kappa, n))), &denom);
        let coef_r = hp.sub(&hp.mul(&hp.int(2), &p2), &hp.int(2));
        let closed = hp.add(&hp.add(&hp.mul(&coef_r, &ln_r), &b), &hp.mul(&p2, &ln0));
        let diff = hp.sub(&closed, &z[n]);
        let rel = hp.to_f64(&diff).exp_m1().abs();
        closed_form_error = closed_form_error.max(rel);
        if !(rel <= CLOSED_FORM_TOL) {
            cf_fail.push(n);
        }
    }

    let f = |v: &[BigFloat], hp: &mut HighPrecision| v.iter().map(|b| hp.to_f64(b)).collect::<Vec<f64>>();
    let ln_x = f(&x, &mut hp);
    let ln_y = f(&y, &mut hp);
    let ln_z = f(&z, &mut hp);

    let y_fail: Vec<bool> = (0..=nm).map(|n| y[n] < hp.mul(&hp.int(-2), &kpow[n])).collect();
    let y_lower_bound = Verdict::from_failures((0..=nm).filter(|&n| y_fail[n]));

    // (c) in the form R² e^{1/(2−κ)} z_0 ≤ 1, i.e. ln z_0 ≤ ln threshold,
    // up to rounding at the working precision.
    let slack = hp.sub(&ln0, &ln_threshold);
    let tol = hp.mul(&hp.num(1e-40), &hp.add(&hp.int(1), &ln_threshold.abs()));
    let condition_c = slack <= tol;

    let c_log = hp.add(&hp.add(&two_ln_r, &inv_gap), &ln0);
    let decrease = Verdict::from_failures((0..=nm).filter(|&n| {
        let falls = n == 0 || z[n] < z[n - 1];
        let bound = hp.add(&two_ln_r.neg(), &hp.mul(&hp.powi(&hp.int(2), n), &c_log));
        let margin = hp.add(&hp.int(1), &bound.abs());
        let below = hp.sub(&z[n], &bound) <= hp.mul(&hp.num(1e-40), &margin);
        !(falls && below)
    }));
    let divergence = (1..=nm).find(|&n| z[n] > hp.int(0) && z[n] > z[n - 1]);

    let x_below_y = Verdict::from_failures((0..=nm).filter(|&n| x[n] > y[n]));
    let hypothesis_until = y_fail.iter().position(|&b| b).unwrap_or(nm + 1);
    let y_below_z = Verdict::from_failures((0..=nm.min(hypothesis_until)).filter(|&n| y[n] > z[n]));

    let start = ln_z[0].exp();
    Ok(MajorantRun {
        params: params.clone(),
        start,
        ln_start: ln_z[0],
        ln_x,
        ln_y,
        ln_z,
        beta,
        gamma,
        closed_form_error,
        closed_form: Verdict::from_failures(cf_fail.into_iter()),
        y_lower_bound,
        y_started_at_threshold: matches!(params.start, StartMode::Threshold),
        condition_c,
        decrease,
        divergence,
        x_below_y,
        y_below_z,
    })
}

/// `β_n = 2^{n−1}(1 − (κ/2)^n)/(1 − κ/2)`.
pub fn beta_n(kappa: f64, n: usize) -> f64 {
    let h = kappa / 2.0;
    (n as f64 - 1.0).exp2() * (1.0 - h.powi(n as i32)) / (1.0 - h)
}

/// `γ_n = (1 − (κ/2)^n)/(2 − κ)`.
pub fn gamma_n(kappa: f64, n: usize) -> f64 {
    (1.0 - (kappa / 2.0).powi(n as i32)) / (2.0 - kappa)
}
