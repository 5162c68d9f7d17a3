use ode_solvers::{DVector, Dop853, System};
use serde::Serialize;

use super::poly::RealPoly;
use super::ToriError;

/// Time integrators for Hamilton's equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Integrator {
    /// Dormand–Prince 8(5,3) with dense output.
    Rk8 { rtol: f64, atol: f64 },
    /// Fourth-order composition of Störmer–Verlet with a fixed step, for
    /// separable Hamiltonians.
    Leapfrog { dt: f64 },
}

impl Integrator {
    /// Tolerance the energy drift is measured against, relative to `|H|`.
    pub fn tolerance(&self) -> f64 {
        match *self {
            Integrator::Rk8 { rtol, .. } => rtol,
            Integrator::Leapfrog { dt } => dt.powi(4),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub evaluations: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

struct Field<'a> {
    vf: &'a [RealPoly],
    sign: f64,
}

impl System<f64, DVector<f64>> for Field<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let x = y.as_slice();
        for (k, f) in self.vf.iter().enumerate() {
            dy[k] = self.sign * f.eval(x);
        }
    }
}

/// Samples `(t_k, y(t_k))` at `t_k = k·dt` for `k = 0..=round(T/dt)`.
pub(crate) type Samples = (Vec<f64>, Vec<Vec<f64>>);

/// Integrate `y' = sign · vf(y)` on `[0, t_span]`, where `vf` lists
/// `(∂H/∂p, −∂H/∂q)`; `sign = −1` runs the flow backwards.
pub(crate) fn integrate(
    vf: &[RealPoly],
    y0: &[f64],
    t_span: f64,
    sample_dt: f64,
    integrator: Integrator,
    sign: f64,
) -> Result<(Samples, IntegratorStats), ToriError> {
    if !(t_span > 0.0 && sample_dt > 0.0 && sample_dt <= t_span) {
        return Err(ToriError::Range(format!("need 0 < dt = {sample_dt} <= T = {t_span}")));
    }
    let n = (t_span / sample_dt).round() as usize;
    match integrator {
        Integrator::Rk8 { rtol, atol } => {
            let mut solver = Dop853::new(
                Field { vf, sign },
                0.0,
                n as f64 * sample_dt,
                sample_dt,
                DVector::from_column_slice(y0),
                rtol,
                atol,
            );
            let stats = solver.integrate().map_err(|e| ToriError::IntegratorFailure(e.to_string()))?;
            let ts: Vec<f64> = solver.x_out().clone();
            let ys: Vec<Vec<f64>> = solver.y_out().iter().map(|v| v.as_slice().to_vec()).collect();
            if ys.iter().flatten().any(|v| !v.is_finite()) {
                return Err(ToriError::IntegratorFailure("non-finite state".into()));
            }
            let stats = IntegratorStats {
                evaluations: u64::from(stats.num_eval),
                accepted_steps: u64::from(stats.accepted_steps),
                rejected_steps: u64::from(stats.rejected_steps),
            };
            Ok(((ts, ys), stats))
        }
        Integrator::Leapfrog { dt } => {
            let sub = (sample_dt / dt).round().max(1.0) as usize;
            let h = sample_dt / sub as f64;
            leapfrog(vf, y0, n, sub, sign * h, sample_dt)
        }
    }
}

fn leapfrog(
    vf: &[RealPoly],
    y0: &[f64],
    n: usize,
    sub: usize,
    h: f64,
    sample_dt: f64,
) -> Result<(Samples, IntegratorStats), ToriError> {
    let d = y0.len() / 2;
    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);
    let mut y = y0.to_vec();
    let mut evals = 0u64;
    let kick = |y: &mut Vec<f64>, s: f64, evals: &mut u64| {
        let f: Vec<f64> = (0..d).map(|k| vf[d + k].eval(y)).collect();
        *evals += 1;
        for k in 0..d {
            y[d + k] += s * f[k];
        }
    };
    let drift = |y: &mut Vec<f64>, s: f64, evals: &mut u64| {
        let f: Vec<f64> = (0..d).map(|k| vf[k].eval(y)).collect();
        *evals += 1;
        for k in 0..d {
            y[k] += s * f[k];
        }
    };
    let mut ts = vec![0.0];
    let mut ys = vec![y.clone()];
    for step in 1..=n {
        for _ in 0..sub {
            for w in [w1, w0, w1] {
                kick(&mut y, 0.5 * w * h, &mut evals);
                drift(&mut y, w * h, &mut evals);
                kick(&mut y, 0.5 * w * h, &mut evals);
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ToriError::IntegratorFailure(format!("leapfrog blew up by t = {}", step as f64 * sample_dt)));
        }
        ts.push(step as f64 * sample_dt);
        ys.push(y.clone());
    }
    let stats = IntegratorStats { evaluations: evals, accepted_steps: (n * sub) as u64, rejected_steps: 0 };
    Ok(((ts, ys), stats))
}
