//! The vector field of the transformed evolution problem, its time
//! integration, and the flat-interface ODE.

mod field;
mod flat;
mod linear;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use field::{validate_linearization, Block, LinearizationEntry, LinearizationReport, PhiValue, VectorField};
pub use flat::{flat_fixed_point, flat_ode_solve, flat_rate, FlatOdeSolution};
pub use linear::{expm2, step_linear, step_linear_tilde};

use crate::elliptic::Discretization;
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::spectrum::eigen_of;
use crate::state::{BoundaryData, InterfaceState};
use crate::symbols::{symbol_general, symbol_tilde};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExactLinear,
    Imex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub record_every: usize,
    pub b: BoundaryData,
    pub disc: Discretization,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput("dt must be positive".into()));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput("t_end must be nonnegative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        if self.disc.n_modes == 0 || self.disc.n_y < 3 {
            return Err(Error::InvalidInput("need n_modes ≥ 1 and n_y ≥ 3".into()));
        }
        Ok(())
    }
}

/// Largest step with dt·|Λ| ≤ 1 over the retained modes, capped at 0.01.
pub fn default_dt(p: &PhysParams, n_modes: usize) -> f64 {
    let c = p.equilibrium_potential();
    let stiff = (1..=n_modes as i64)
        .map(|m| {
            let e = eigen_of(m, &symbol_general(m, p, c));
            e.lambda_plus.abs().max(e.lambda_minus.abs())
        })
        .fold(0.0, f64::max);
    if stiff > 0.0 {
        (1.0 / stiff).min(0.01)
    } else {
        0.01
    }
}

/// One first-order IMEX step: the flat-state multipliers at c = mean b(t)
/// are taken implicitly per mode, Φ - L·u explicitly. The mean mode is
/// advanced in the variables (f, f̃ = f - h).
pub fn step_nonlinear(state: &InterfaceState, dt: f64, b: &BoundaryData, field: &VectorField) -> Result<InterfaceState> {
    let p = &field.params;
    let n = field.n_modes();
    let f = state.f.resized(n);
    let h = state.h.resized(n);
    let t = state.time;
    let phi = field.eval(&f, &h, &b.at(t, n))?;
    let c = b.mean_at(t);

    let mut out_f = f.clone();
    let mut out_h = h.clone();

    let a0 = symbol_tilde(0, p).lam_f1;
    let f0 = f.mean();
    let ft0 = f0 - h.mean();
    let ft0_new = ft0 + dt * (phi.phi1.mean() - phi.phi2.mean());
    let f0_new = (f0 + dt * (phi.phi1.mean() - a0 * f0)) / (1.0 - dt * a0);
    out_f.set(0, Complex64::new(f0_new, 0.0));
    out_h.set(0, Complex64::new(f0_new - ft0_new, 0.0));

    for m in 1..=n {
        let l = symbol_general(m as i64, p, c).matrix();
        let (uf, uh) = (f.coeff(m as i64), h.coeff(m as i64));
        let r0 = uf + dt * (phi.phi1.coeff(m as i64) - l[0][0] * uf - l[0][1] * uh);
        let r1 = uh + dt * (phi.phi2.coeff(m as i64) - l[1][0] * uf - l[1][1] * uh);
        let (a, bb, cc, d) = (1.0 - dt * l[0][0], -dt * l[0][1], -dt * l[1][0], 1.0 - dt * l[1][1]);
        let det = a * d - bb * cc;
        out_f.set(m, (d * r0 - bb * r1) / det);
        out_h.set(m, (a * r1 - cc * r0) / det);
    }
    Ok(InterfaceState {
        n_modes: n,
        f: out_f,
        h: out_h,
        time: t + dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Finished,
    Inadmissible,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: InterfaceState,
    pub volume_integral: f64,
    pub max_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub termination: Termination,
    /// Largest |∫(f-h)dx - ∫(f₀-h₀)dx| over all steps.
    pub volume_drift: f64,
    /// Rate of the dominant mode, if enough samples lie in the second half.
    pub fitted_rate: Option<f64>,
    pub dominant_mode: Option<usize>,
    pub message: Option<String>,
}

fn sample(state: &InterfaceState) -> TrajectorySample {
    TrajectorySample {
        time: state.time,
        state: state.clone(),
        volume_integral: state.volume_integral(),
        max_amplitude: state.max_amplitude(),
    }
}

/// Least-squares slope of y against t.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Minimum number of samples in the fitting window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Growth or decay rate of mode `m`, fitted over the second half of the
/// recorded samples to the log of the projection onto the left eigenvector
/// of Λ₊(m). The projection removes the Λ₋ transient, which otherwise
/// biases a fit of the raw amplitude.
pub fn fit_mode_rate(samples: &[TrajectorySample], m: usize, p: &PhysParams, c: f64) -> Option<f64> {
    let t_last = samples.last()?.time;
    let t_first = samples.first()?.time;
    let t_half = 0.5 * (t_first + t_last);
    let q = symbol_general(m as i64, p, c);
    let e = eigen_of(m as i64, &q);
    let l = q.matrix();
    let w = if e.complex_pair {
        None
    } else {
        let w1 = (l[1][0], e.lambda_plus - l[0][0]);
        let w2 = (e.lambda_plus - l[1][1], l[0][1]);
        let pick = if w1.0.hypot(w1.1) >= w2.0.hypot(w2.1) { w1 } else { w2 };
        (pick.0.hypot(pick.1) > 0.0).then_some(pick)
    };
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.time >= t_half)
        .map(|s| {
            let (uf, uh) = (s.state.f.coeff(m as i64), s.state.h.coeff(m as i64));
            let amp = match w {
                Some((a, b)) => (a * uf + b * uh).norm(),
                None => (uf.norm_sqr() + uh.norm_sqr()).sqrt(),
            };
            (s.time, amp.ln())
        })
        .filter(|p| p.1.is_finite())
        .collect();
    if points.len() < MIN_FIT_SAMPLES {
        return None;
    }
    fit_slope(&points)
}

fn dominant_mode(state: &InterfaceState) -> Option<usize> {
    (1..=state.n_modes)
        .map(|m| {
            let a = state.f.coeff(m as i64).norm() + state.h.coeff(m as i64).norm();
            (m, a)
        })
        .filter(|(_, a)| *a > 0.0)
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(m, _)| m)
}

/// Runs the evolution from an admissible initial state.
pub fn simulate(initial: &InterfaceState, config: &EvolutionConfig, p: &PhysParams) -> Result<Trajectory> {
    config.validate()?;
    let p = p.validate()?;
    let n = config.disc.n_modes;
    let grid_len = 4 * n + 1;
    let mut state = InterfaceState {
        n_modes: n,
        f: initial.f.resized(n),
        h: initial.h.resized(n),
        time: initial.time,
    };
    state.ensure_admissible(grid_len)?;

    if config.integrator == Integrator::ExactLinear {
        match config.b {
            BoundaryData::Constant(c) if (c - p.equilibrium_potential()).abs() <= 1e-12 * c.abs().max(1.0) => {}
            _ => {
                return Err(Error::InvalidInput(
                    "exact-linear integration needs b ≡ gρ₊".into(),
                ))
            }
        }
    }

    let field = VectorField::new(p, config.disc);
    let v0 = state.volume_integral();
    let mut volume_drift = 0.0f64;
    let mut samples = vec![sample(&state)];
    let steps = ((config.t_end - state.time) / config.dt - 1e-9).ceil().max(0.0) as usize;
    let t_end = state.time + config.t_end;
    let mut termination = Termination::Finished;
    let mut message = None;

    for k in 1..=steps {
        let dt = if k == steps { t_end - state.time } else { config.dt };
        let next = match config.integrator {
            Integrator::ExactLinear => Ok(step_linear(&state, dt, &p)),
            Integrator::Imex => step_nonlinear(&state, dt, &config.b, &field),
        };
        let next = match next {
            Ok(s) => s,
            Err(e @ Error::DegenerateMapping { .. }) => {
                termination = Termination::Inadmissible;
                message = Some(e.to_string());
                break;
            }
            Err(e) => {
                termination = Termination::Diverged;
                message = Some(e.to_string());
                break;
            }
        };
        if !next.is_finite() {
            termination = Termination::Diverged;
            message = Some(format!("non-finite state at t = {}", next.time));
            break;
        }
        let report = next.admissibility(grid_len);
        if !report.admissible {
            termination = Termination::Inadmissible;
            message = Some(Error::Inadmissible { max_f: report.max_f, max_h: report.max_h }.to_string());
            samples.push(sample(&next));
            break;
        }
        volume_drift = volume_drift.max((next.volume_integral() - v0).abs());
        state = next;
        if k % config.record_every == 0 || k == steps {
            samples.push(sample(&state));
        }
    }

    let dominant = dominant_mode(&samples.last().expect("initial sample").state);
    let fitted_rate = match (termination, dominant) {
        (Termination::Finished, Some(m)) => fit_mode_rate(&samples, m, &p, config.b.mean_at(state.time)),
        _ => None,
    };
    Ok(Trajectory {
        samples,
        termination,
        volume_drift,
        fitted_rate,
        dominant_mode: dominant,
        message,
    })
}

/// |f̂_m|² + |ĥ_m|² for m = 0..=N.
pub fn mode_energies(state: &InterfaceState) -> Vec<f64> {
    (0..=state.n_modes as i64)
        .map(|m| state.f.coeff(m).norm_sqr() + state.h.coeff(m).norm_sqr())
        .collect()
}
