use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::flow::{integrate, Integrator, IntegratorStats};
use super::normalize::Normalization;
use super::poly::RealPoly;
use super::ToriError;

#[derive(Clone, Debug, Serialize)]
pub struct TorusConfig {
    pub t_span: f64,
    pub sample_dt: f64,
    /// Number of starting points on the torus image.
    pub trajectories: usize,
    pub seed: u64,
    pub integrator: Integrator,
    /// Pulled-back points must stay within this multiple of the largest
    /// torus amplitude `√(2τ_i)`.
    pub validity_factor: f64,
    pub keep_samples: bool,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            t_span: 100.0,
            sample_dt: 0.05,
            trajectories: 8,
            seed: 0,
            integrator: Integrator::Rk8 { rtol: 1e-14, atol: 1e-17 },
            validity_factor: 4.0,
            keep_samples: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    /// `(q, p)` in the original coordinates.
    pub state: Vec<f64>,
    /// `½(Q_i² + P_i²)` of the pulled-back point.
    pub actions: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyEstimate {
    pub frequencies: Vec<f64>,
    /// Standard error of each regression slope.
    pub uncertainty: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport {
    pub angles: Vec<f64>,
    /// `max_i (max_t I_i − min_t I_i)` over the samples.
    pub defect: f64,
    /// `max_i max_t |I_i(t) − I_i(0)|`.
    pub anchored_defect: f64,
    pub energy_drift: f64,
    pub energy_ok: bool,
    pub frequencies: FrequencyEstimate,
    pub stats: IntegratorStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<TrajectorySample>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusReport {
    pub tau: Vec<f64>,
    /// Largest mode amplitude `√(2τ_i)`.
    pub rho: f64,
    pub defect: f64,
    pub anchored_defect: f64,
    /// Mean over trajectories.
    pub frequencies: Vec<f64>,
    pub frequency_uncertainty: Vec<f64>,
    /// `β_N(τ)`.
    pub predicted: Vec<f64>,
    pub frequency_error: f64,
    pub energy_drift: f64,
    pub energy_ok: bool,
    pub integrator: Integrator,
    pub stats: IntegratorStats,
    pub seed: u64,
    pub trajectories: Vec<TrajectoryReport>,
}

/// Actions `½ρ² w_i`, so a mode of weight 1 has amplitude `ρ`.
pub fn tau_at_scale(rho: f64, weights: &[f64]) -> Vec<f64> {
    weights.iter().map(|w| 0.5 * rho * rho * w).collect()
}

fn eval_all(polys: &[RealPoly], x: &[f64]) -> Vec<f64> {
    polys.iter().map(|p| p.eval(x)).collect()
}

/// Per-mode rotation frequency by least squares on the unwrapped phase of
/// `Q_i + iP_i`; a positive frequency turns clockwise, as the flow of
/// `½α(P²+Q²)` does.
pub fn estimate_frequencies(times: &[f64], coords: &[Vec<f64>]) -> Result<FrequencyEstimate, ToriError> {
    if times.len() < 3 || times.len() != coords.len() {
        return Err(ToriError::Range(format!("need at least 3 matching samples, got {}", times.len())));
    }
    let d = coords[0].len() / 2;
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let mut frequencies = Vec::with_capacity(d);
    let mut uncertainty = Vec::with_capacity(d);
    for i in 0..d {
        let mut phase = Vec::with_capacity(times.len());
        let mut last = 0.0f64;
        for (k, y) in coords.iter().enumerate() {
            let (q, p) = (y[i], y[d + i]);
            if !(q.is_finite() && p.is_finite()) || (q == 0.0 && p == 0.0) {
                return Err(ToriError::DegenerateOrbit(i));
            }
            let raw = p.atan2(q);
            if k == 0 {
                phase.push(raw);
                last = raw;
                continue;
            }
            let prev = phase[k - 1];
            let jump = (raw - last + PI).rem_euclid(TAU) - PI;
            if jump.abs() > PI / 2.0 {
                return Err(ToriError::PhaseUnwrapAmbiguous { mode: i, t: times[k], jump });
            }
            phase.push(prev + jump);
            last = raw;
        }
        let pm = phase.iter().sum::<f64>() / n;
        let slope = times.iter().zip(&phase).map(|(t, f)| (t - tm) * (f - pm)).sum::<f64>() / stt;
        let rss: f64 = times
            .iter()
            .zip(&phase)
            .map(|(t, f)| (f - pm - slope * (t - tm)).powi(2))
            .sum();
        frequencies.push(-slope);
        uncertainty.push((rss / (n - 2.0) / stt).sqrt());
    }
    Ok(FrequencyEstimate { frequencies, uncertainty })
}

pub(crate) struct Measurement<'a> {
    pub vf: &'a [RealPoly],
    pub energy: &'a RealPoly,
    pub inverse: &'a [RealPoly],
    pub radius: f64,
}

/// Integrate from `x0` with time direction `sign` and measure the pulled-back actions.
pub(crate) fn measure(
    m: &Measurement<'_>,
    x0: &[f64],
    angles: Vec<f64>,
    config: &TorusConfig,
    sign: f64,
) -> Result<TrajectoryReport, ToriError> {
    let ((ts, ys), stats) = integrate(m.vf, x0, config.t_span, config.sample_dt, config.integrator, sign)?;
    let d = x0.len() / 2;
    let h0 = m.energy.eval(&ys[0]);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut first = Vec::new();
    let mut anchored = 0.0f64;
    let mut drift = 0.0f64;
    let mut normal = Vec::with_capacity(ys.len());
    let mut samples = config.keep_samples.then(Vec::new);
    for (t, y) in ts.iter().zip(&ys) {
        let z = eval_all(m.inverse, y);
        let norm = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(norm <= m.radius) {
            return Err(ToriError::InverseDiverged { t: *t, norm, radius: m.radius });
        }
        let actions: Vec<f64> = (0..d).map(|i| 0.5 * (z[i] * z[i] + z[d + i] * z[d + i])).collect();
        if first.is_empty() {
            first = actions.clone();
        }
        for i in 0..d {
            lo[i] = lo[i].min(actions[i]);
            hi[i] = hi[i].max(actions[i]);
            anchored = anchored.max((actions[i] - first[i]).abs());
        }
        let e = m.energy.eval(y);
        drift = drift.max((e - h0).abs());
        if let Some(s) = samples.as_mut() {
            s.push(TrajectorySample { t: *t, state: y.clone(), actions, energy: e });
        }
        normal.push(z);
    }
    let defect = (0..d).map(|i| hi[i] - lo[i]).fold(0.0f64, f64::max);
    let mut frequencies = estimate_frequencies(&ts, &normal)?;
    for f in frequencies.frequencies.iter_mut() {
        *f *= sign;
    }
    let budget = 10.0 * config.integrator.tolerance() * h0.abs();
    Ok(TrajectoryReport {
        angles,
        defect,
        anchored_defect: anchored,
        energy_drift: drift,
        energy_ok: drift <= budget,
        frequencies,
        stats,
        samples,
    })
}

/// Seed points on `Ψ_N(τ, {½(Q_i²+P_i²) = τ_i})`, integrate the original
/// Hamiltonian and record how far the pulled-back actions move.
pub fn torus_defect(norm: &Normalization, tau: &[f64], config: &TorusConfig) -> Result<TorusReport, ToriError> {
    let d = norm.dim();
    if tau.len() != d || tau.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(ToriError::Range(format!("τ must be {d} nonnegative actions, got {tau:?}")));
    }
    if config.trajectories == 0 {
        return Err(ToriError::Range("need at least one trajectory".into()));
    }
    if matches!(config.integrator, Integrator::Leapfrog { .. }) && !norm.separable {
        return Err(ToriError::IntegratorFailure("leapfrog needs a Hamiltonian of the form T(p) + V(q)".into()));
    }
    let map = norm.map_at(tau);
    let inverse = norm.inverse_at(tau);
    let amp: Vec<f64> = tau.iter().map(|t| (2.0 * t).sqrt()).collect();
    let rho = amp.iter().copied().fold(0.0, f64::max);
    let m = Measurement {
        vf: &norm.vector_field,
        energy: &norm.hamiltonian_f64,
        inverse: &inverse,
        radius: config.validity_factor * rho,
    };
    let runs: Vec<Result<TrajectoryReport, ToriError>> = (0..config.trajectories)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let angles: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * TAU).collect();
            let mut y = vec![0.0; 2 * d];
            for i in 0..d {
                y[i] = amp[i] * angles[i].cos();
                y[d + i] = -amp[i] * angles[i].sin();
            }
            let x0 = eval_all(&map, &y);
            measure(&m, &x0, angles, config, 1.0)
        })
        .collect();
    let trajectories = runs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let k = trajectories.len() as f64;
    let frequencies: Vec<f64> =
        (0..d).map(|i| trajectories.iter().map(|r| r.frequencies.frequencies[i]).sum::<f64>() / k).collect();
    let frequency_uncertainty: Vec<f64> = (0..d)
        .map(|i| trajectories.iter().map(|r| r.frequencies.uncertainty[i]).fold(0.0, f64::max))
        .collect();
    let predicted = norm.predicted_frequencies(tau);
    let frequency_error = frequencies.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut stats = IntegratorStats::default();
    for r in &trajectories {
        stats.evaluations += r.stats.evaluations;
        stats.accepted_steps += r.stats.accepted_steps;
        stats.rejected_steps += r.stats.rejected_steps;
    }
    Ok(TorusReport {
        tau: tau.to_vec(),
        rho,
        defect: trajectories.iter().map(|r| r.defect).fold(0.0, f64::max),
        anchored_defect: trajectories.iter().map(|r| r.anchored_defect).fold(0.0, f64::max),
        frequencies,
        frequency_uncertainty,
        predicted,
        frequency_error,
        energy_drift: trajectories.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
        energy_ok: trajectories.iter().all(|r| r.energy_ok),
        integrator: config.integrator,
        stats,
        seed: config.seed,
        trajectories,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub rhos: Vec<f64>,
    pub defects: Vec<f64>,
    /// Least-squares slope of `log defect` against `log ρ`.
    pub slope: f64,
    /// `N − 2`: one order lost to the truncated inverse, one to the window.
    pub required_slope: f64,
    pub slope_pass: bool,
    /// `defect(ρ') < defect(ρ)` whenever `ρ' < ρ`.
    pub monotone: bool,
    pub frequency_errors: Vec<f64>,
    /// `10 ρ^{N−2}`.
    pub frequency_bounds: Vec<f64>,
    pub frequency_pass: bool,
    pub energy_drift: f64,
    pub energy_ok: bool,
    pub reports: Vec<TorusReport>,
}

impl ScalingReport {
    pub fn all_pass(&self) -> bool {
        self.slope_pass && self.monotone && self.frequency_pass && self.energy_ok
    }
}

/// Run [`torus_defect`] at `τ = tau_at_scale(ρ, weights)` for each ρ and fit the scaling.
pub fn defect_scaling(
    norm: &Normalization,
    rhos: &[f64],
    weights: &[f64],
    config: &TorusConfig,
) -> Result<ScalingReport, ToriError> {
    if rhos.len() < 2 || rhos.iter().any(|r| !(*r > 0.0)) {
        return Err(ToriError::Range("need at least two positive scales".into()));
    }
    let reports = rhos
        .iter()
        .map(|&r| torus_defect(norm, &tau_at_scale(r, weights), config))
        .collect::<Result<Vec<_>, _>>()?;
    let defects: Vec<f64> = reports.iter().map(|r| r.defect).collect();
    let xs: Vec<f64> = rhos.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>()
        / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    let required_slope = f64::from(norm.cutoff) - 2.0;
    let mut monotone = true;
    for a in 0..rhos.len() {
        for b in 0..rhos.len() {
            if rhos[b] < rhos[a] && !(defects[b] < defects[a]) {
                monotone = false;
            }
        }
    }
    let frequency_errors: Vec<f64> = reports.iter().map(|r| r.frequency_error).collect();
    let frequency_bounds: Vec<f64> = rhos.iter().map(|r| 10.0 * r.powf(required_slope)).collect();
    let frequency_pass = frequency_errors.iter().zip(&frequency_bounds).all(|(e, b)| e <= b);
    Ok(ScalingReport {
        rhos: rhos.to_vec(),
        slope_pass: slope >= required_slope,
        slope,
        required_slope,
        monotone,
        frequency_errors,
        frequency_bounds,
        frequency_pass,
        energy_drift: reports.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
        energy_ok: reports.iter().all(|r| r.energy_ok),
        defects,
        reports,
    })
}
