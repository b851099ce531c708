use serde::{Deserialize, Serialize};

use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dopri5, OutputType, System, Vector1};

use crate::error::{Error, Result};
use crate::params::PhysParams;

/// Samples of the flat-interface height f(t) = h(t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatOdeSolution {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub steps: usize,
}

/// Right-hand side of the flat-interface ODE at height f and potential b.
pub fn flat_rate(p: &PhysParams, f: f64, b: f64) -> f64 {
    let fixed = (p.g * p.rho_plus - b) / (p.g * p.rho_minus);
    -(p.k * p.g * p.rho_minus / p.mu_minus) * (f + fixed) / (f + p.mu_sum() / p.mu_minus)
}

/// Fixed point f* = (b - gρ₊)/(gρ₋) for constant b.
pub fn flat_fixed_point(p: &PhysParams, b: f64) -> f64 {
    (b - p.g * p.rho_plus) / (p.g * p.rho_minus)
}

struct FlatSystem<'a, B> {
    p: &'a PhysParams,
    b: &'a B,
}

impl<B: Fn(f64) -> f64> System<f64, Vector1<f64>> for FlatSystem<'_, B> {
    fn system(&self, t: f64, y: &Vector1<f64>, dy: &mut Vector1<f64>) {
        dy[0] = flat_rate(self.p, y[0], (self.b)(t));
    }
}

/// Reports the span left unintegrated as the residual.
fn stalled(e: IntegrationError, t_end: f64) -> Error {
    let (x, n) = match e {
        IntegrationError::MaxNumStepReached { x, n_step } => (x, n_step as usize),
        IntegrationError::StepSizeUnderflow { x } | IntegrationError::StiffnessDetected { x } => (x, 0),
    };
    Error::NoConvergence {
        iterations: n,
        residual: t_end - x,
    }
}

/// Integrates f' = -(kgρ₋/μ₋)(f + (gρ₊ - b(t))/(gρ₋))/(f + (μ₊+μ₋)/μ₋)
/// and samples it at `n_samples + 1` equally spaced times in [0, t_end].
pub fn flat_ode_solve(
    f0: f64,
    b: impl Fn(f64) -> f64,
    p: &PhysParams,
    t_end: f64,
    n_samples: usize,
) -> Result<FlatOdeSolution> {
    if f0 + p.mu_sum() / p.mu_minus == 0.0 {
        return Err(Error::InvalidInput("initial height hits the pole of the flat ODE".into()));
    }
    if !(t_end >= 0.0) || n_samples == 0 {
        return Err(Error::InvalidInput("need t_end ≥ 0 and at least one sample".into()));
    }
    let mut times = vec![0.0];
    let mut values = vec![f0];
    let mut steps = 0;
    let mut y = f0;
    for i in 1..=n_samples {
        let ta = t_end * (i - 1) as f64 / n_samples as f64;
        let tb = t_end * i as f64 / n_samples as f64;
        if tb > ta {
            let system = FlatSystem { p, b: &b };
            // sparse output records the accepted steps, the last ending at tb
            let mut solver = Dopri5::from_param(
                system,
                ta,
                tb,
                tb - ta,
                Vector1::new(y),
                1e-12,
                1e-14,
                0.9,
                0.04,
                0.2,
                10.0,
                tb - ta,
                0.0,
                1_000_000,
                1000,
                OutputType::Sparse,
            );
            let stats = solver.integrate().map_err(|e| stalled(e, tb))?;
            y = solver.y_out().last().expect("solver records the end point")[0];
            steps += stats.accepted_steps as usize;
        }
        times.push(tb);
        values.push(y);
    }
    Ok(FlatOdeSolution { times, values, steps })
}
