use astro_float::BigFloat;
use serde::Serialize;

use super::sequence::SequenceSpec;
use super::ArithError;
use crate::precise::HighPrecision;

/// A bound `C ρ_n^k a_n^{−l} (s_n − s_{n+1})^{−m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundClass {
    pub c: f64,
    pub k: f64,
    pub l: f64,
    pub m: f64,
}

impl BoundClass {
    pub fn new(c: f64, k: f64, l: f64, m: f64) -> Result<Self, ArithError> {
        if [c, k, l, m].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(ArithError::BadParameter(format!(
                "bound class ({c}, {k}, {l}, {m}) needs finite nonnegative constants"
            )));
        }
        Ok(Self { c, k, l, m })
    }

    /// Whether ρ enters with a positive power, so that it can be absorbed.
    pub fn is_strict(&self) -> bool {
        self.k > 0.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Absorption {
    pub class: BoundClass,
    pub a: SequenceSpec,
    pub b: SequenceSpec,
    pub s0: f64,
    pub rho: Vec<f64>,
    /// `log ρ_n`, finite where `ρ_n` underflows.
    pub ln_rho: Vec<f64>,
    /// `s_T^{−m}` with `T` the truncation point of the radius product.
    pub k_const: f64,
    pub truncation: usize,
    /// `u_n / (K b_n)` for `n ≤ N`, evaluated at high precision.
    pub ratios: Vec<f64>,
    /// First `n` with `u_n ≥ K b_n` or `ρ_n > 1/2`, if any.
    pub first_failure: Option<usize>,
    /// `Σ_{n≤T} |log ρ_n| / 2^n`.
    pub rho_bruno_sum: f64,
    pub precision: usize,
}

impl Absorption {
    pub fn holds(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Choose `ρ_n = 2^{−(n+1)m/k} M^{−1/k} a_n^{l/k} b_n^{1/k}` with
/// `M = max(C, 2^k a₀^l b₀)` and check `u_n < K b_n`, `ρ_n ≤ 1/2` for `n ≤ N`.
///
/// Everything is carried in the log domain at `bits` of precision. The radii
/// `s_n` are followed up to a truncation point `T > N` where the terms of
/// `Σ log ρ_n / 2^n` fall below the working precision; `K = s_T^{−m}` is then
/// a valid constant for every `n < T`, and differs from `s_∞^{−m}` only by
/// the neglected tail.
pub fn absorb_rho(
    class: &BoundClass,
    a: &SequenceSpec,
    b: &SequenceSpec,
    s0: f64,
    n_max: usize,
    bits: usize,
) -> Result<Absorption, ArithError> {
    if !class.is_strict() {
        return Err(ArithError::NotStrictClass);
    }
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(ArithError::BadParameter(format!("s0 = {s0} must be positive")));
    }
    let mut hp = HighPrecision::new(bits);
    let truncation = truncation_point(a, b, n_max, bits);
    let ln_a = a.ln_terms(truncation, &mut hp)?;
    let ln_b = b.ln_terms(truncation, &mut hp)?;
    let k = hp.num(class.k);
    let l = hp.num(class.l);
    let m = hp.num(class.m);
    let ln2 = hp.ln(&hp.int(2));
    let ln_c = if class.c > 0.0 { Some(hp.ln(&hp.num(class.c))) } else { None };
    // ln M = max(ln C, k ln 2 + l ln a₀ + ln b₀).
    let ln_floor = hp.add(&hp.add(&hp.mul(&k, &ln2), &hp.mul(&l, &ln_a[0])), &ln_b[0]);
    let ln_m = match &ln_c {
        Some(c) if *c > ln_floor => c.clone(),
        _ => ln_floor,
    };

    let mut ln_rho = Vec::with_capacity(truncation + 1);
    for n in 0..=truncation {
        let t = hp.mul(&hp.int(-(n as i64) - 1), &hp.mul(&m, &ln2));
        let t = hp.sub(&t, &ln_m);
        let t = hp.add(&t, &hp.mul(&l, &ln_a[n]));
        let t = hp.add(&t, &ln_b[n]);
        ln_rho.push(hp.div(&t, &k));
    }
    // ln s_n, n = 0..=T+1.
    let mut ln_s = vec![hp.ln(&hp.num(s0))];
    for (n, lr) in ln_rho.iter().enumerate() {
        let step = hp.div(lr, &hp.powi(&hp.int(2), n));
        let next = hp.add(&ln_s[n], &step);
        ln_s.push(next);
    }
    let ln_k = hp.mul(&m.neg(), &ln_s[truncation]);
    let half = hp.ln(&hp.num(0.5));

    let mut ratios = Vec::with_capacity(n_max + 1);
    let mut first_failure = None;
    for n in 0..=n_max {
        // ln u_n = ln C + k ln ρ_n − l ln a_n − m ln(s_n − s_{n+1}).
        // ln(s_n − s_{n+1}) = ln s_n + ln(1 − e^{ln ρ_n / 2^n}).
        let step = hp.div(&ln_rho[n], &hp.powi(&hp.int(2), n));
        let shrink = hp.expm1(&step).neg();
        let ln_shrink = hp.ln(&shrink);
        let ln_gap = hp.add(&ln_s[n], &ln_shrink);
        let ln_u = match &ln_c {
            None => None,
            Some(c) => {
                let t = hp.add(c, &hp.mul(&k, &ln_rho[n]));
                let t = hp.sub(&t, &hp.mul(&l, &ln_a[n]));
                Some(hp.sub(&t, &hp.mul(&m, &ln_gap)))
            }
        };
        let ln_rhs = hp.add(&ln_k, &ln_b[n]);
        let (ratio, below) = match ln_u {
            None => (0.0, true),
            Some(u) => {
                let d = hp.sub(&u, &ln_rhs);
                let r = hp.exp(&d);
                (hp.to_f64(&r), d.is_negative())
            }
        };
        let rho_ok = ln_rho[n] <= half;
        if first_failure.is_none() && !(below && rho_ok) {
            first_failure = Some(n);
        }
        ratios.push(ratio);
    }

    let mut bruno = hp.int(0);
    for (n, lr) in ln_rho.iter().enumerate() {
        bruno = hp.add(&bruno, &hp.div(&lr.abs(), &hp.powi(&hp.int(2), n)));
    }
    let rho = ln_rho[..=n_max].iter().map(|x| hp.exp(x)).collect::<Vec<BigFloat>>();
    let k_const = hp.exp(&ln_k);
    Ok(Absorption {
        class: *class,
        a: a.clone(),
        b: b.clone(),
        s0,
        rho: rho.iter().map(|x| hp.to_f64(x)).collect(),
        ln_rho: ln_rho[..=n_max].iter().map(|x| hp.to_f64(x)).collect(),
        k_const: hp.to_f64(&k_const),
        truncation,
        ratios,
        first_failure,
        rho_bruno_sum: hp.to_f64(&bruno),
        precision: bits,
    })
}

/// A point past which `|log ρ_n| / 2^n` is below `2^{−bits}` for the closed
/// forms; explicit lists are followed to their end.
fn truncation_point(a: &SequenceSpec, b: &SequenceSpec, n_max: usize, bits: usize) -> usize {
    // |log a_n| grows at most like n (geometric) or κ^n with κ < 2 for the
    // sequences we can absorb against; 2^n outruns both.
    let growth = |s: &SequenceSpec| match s {
        SequenceSpec::DoubleExp(kappa) => kappa.log2().max(0.0),
        _ => 0.0,
    };
    let rate = 1.0 - growth(a).max(growth(b));
    let closed = if rate > 0.0 {
        ((bits as f64 + 64.0) / rate).ceil() as usize
    } else {
        4 * bits
    };
    let list_len = |s: &SequenceSpec| match s {
        SequenceSpec::List(v) => Some(v.len() - 1),
        SequenceSpec::NuSigma { .. } => Some(n_max + 1),
        _ => None,
    };
    let cap = [list_len(a), list_len(b)].into_iter().flatten().min();
    let t = cap.map_or(closed, |c| c.min(closed)).min(1 << 14);
    t.max(n_max + 1)
}
