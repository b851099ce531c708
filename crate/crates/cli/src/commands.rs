use serde_json::{json, Value};

use muskat2i::equilibria::{
    branch_asymptote_check, continue_branch_with, exchange_stability_estimate, Branch,
};
use muskat2i::evolution::{flat_ode_solve, simulate as run_simulation, validate_linearization, Termination};
use muskat2i::spectrum::{eigen_of, spectrum_report};
use muskat2i::symbols::{p_max, rt_conditions, symbol_equilibrium};
use muskat2i::{BoundaryData, Config};

use crate::output::{Cell, Sink, Table};
use crate::Failure;

/// Linearisation deviation accepted by `validate --linearization`.
const LINEARIZATION_TOL: f64 = 1e-3;

fn io(r: Result<(), String>) -> Result<(), Failure> {
    r.map_err(Failure::Usage)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

/// Potential used where a single constant is needed.
fn boundary_constant(config: &Config) -> f64 {
    config.boundary.mean_at(0.0)
}

pub fn dispersion(config: &Config, m_max: usize, sink: &Sink) -> Result<(), Failure> {
    let mut t = Table::new(&["m", "lam_f1", "lam_f2", "lam_h1", "lam_h2", "Lambda_plus", "Lambda_minus"]);
    for m in 0..=m_max as i64 {
        let q = symbol_equilibrium(m, &config.params);
        let e = eigen_of(m, &q);
        t.push(vec![
            Cell::Int(m),
            Cell::Float(q.lam_f1),
            Cell::Float(q.lam_f2),
            Cell::Float(q.lam_h1),
            Cell::Float(q.lam_h2),
            Cell::Float(e.lambda_plus),
            Cell::Float(e.lambda_minus),
        ]);
    }
    io(sink.table(&t))
}

pub fn rt_check(config: &Config, c: Option<f64>, sink: &Sink) -> Result<(), Failure> {
    let c = c.unwrap_or_else(|| boundary_constant(config));
    let mut v = to_value(&rt_conditions(&config.params, c));
    v["c"] = json!(c);
    v["pressure_bound"] = p_max(&config.params).map(|b| to_value(&b)).unwrap_or(Value::Null);
    io(sink.json(&v))
}

pub fn spectrum(config: &Config, m_max: usize, sink: &Sink) -> Result<(), Failure> {
    let report = spectrum_report(&config.params, m_max)?;
    io(sink.json(&to_value(&report)))
}

pub fn flat_ode(
    config: &Config,
    f0: Option<f64>,
    t_end: Option<f64>,
    samples: usize,
    sink: &Sink,
) -> Result<(), Failure> {
    let f0 = f0.unwrap_or_else(|| config.initial.f.mean());
    let t_end = t_end.unwrap_or(config.discretization.t_end);
    let b = config.boundary.clone();
    let sol = flat_ode_solve(f0, |t| b.mean_at(t), &config.params, t_end, samples)?;
    let mut t = Table::new(&["t", "f"]);
    for (time, f) in sol.times.iter().zip(&sol.values) {
        t.push(vec![Cell::Float(*time), Cell::Float(*f)]);
    }
    io(sink.table(&t))?;
    let fixed = match config.boundary {
        BoundaryData::Constant(c) => json!(muskat2i::evolution::flat_fixed_point(&config.params, c)),
        _ => Value::Null,
    };
    io(sink.summary(&json!({ "steps": sol.steps, "fixed_point": fixed })))
}

pub fn simulate(config: &Config, sink: &Sink) -> Result<(), Failure> {
    let evo = config.evolution()?;
    let traj = run_simulation(&config.initial, &evo, &config.params)?;
    let mut t = Table::new(&["t", "mode", "re_f", "im_f", "re_h", "im_h"]);
    for s in &traj.samples {
        for m in 0..=s.state.n_modes as i64 {
            let (f, h) = (s.state.f.coeff(m), s.state.h.coeff(m));
            t.push(vec![
                Cell::Float(s.time),
                Cell::Int(m),
                Cell::Float(f.re),
                Cell::Float(f.im),
                Cell::Float(h.re),
                Cell::Float(h.im),
            ]);
        }
    }
    io(sink.table(&t))?;
    let last = traj.samples.last().expect("trajectory has an initial sample");
    io(sink.summary(&json!({
        "termination": to_value(&traj.termination),
        "volume_drift": traj.volume_drift,
        "fitted_rate": traj.fitted_rate,
        "dominant_mode": traj.dominant_mode,
        "dt": evo.dt,
        "final_time": last.time,
        "final_max_amplitude": last.max_amplitude,
        "message": traj.message,
    })))?;
    match traj.termination {
        Termination::Finished => Ok(()),
        _ => Err(Failure::Numerical(
            traj.message.unwrap_or_else(|| "simulation stopped early".into()),
        )),
    }
}

fn branch_table(b: &Branch) -> Table {
    let mut t = Table::new(&["eps", "gamma_w", "residual", "first_integral_spread", "max_f", "max_fprime"]);
    for pt in &b.points {
        t.push(vec![
            Cell::Float(pt.eps),
            Cell::Float(pt.gamma_w),
            Cell::Float(pt.residual_norm),
            Cell::Float(pt.first_integral_spread),
            Cell::Float(pt.max_f),
            Cell::Float(pt.max_fprime),
        ]);
    }
    t
}

pub fn equilibria(
    config: &Config,
    l: usize,
    eps_max: f64,
    step: f64,
    n_coeffs: usize,
    sink: &Sink,
) -> Result<(), Failure> {
    let branch = continue_branch_with(l, eps_max, step, &config.params, n_coeffs)?;
    io(sink.table(&branch_table(&branch)))?;
    let asym = branch_asymptote_check(&branch, &config.params);
    let exchange = exchange_stability_estimate(&branch, &config.params).ok();
    let mu_sign = exchange.as_ref().map(|e| {
        if e.all_unstable {
            "positive"
        } else if e.points.iter().all(|p| p.mu_est < 0.0) {
            "negative"
        } else {
            "mixed"
        }
    });
    io(sink.summary(&json!({
        "l": l,
        "gamma_bar": branch.gamma_bar,
        "fitted_quadratic": branch.fitted_quadratic,
        "asymptote_bound": asym.bound,
        "asymptote_holds": asym.holds,
        "asymptote_applicable": asym.applicable,
        "mu_sign": mu_sign,
        "lambda_prime": exchange.as_ref().map(|e| e.lambda_prime),
        "mode_one_at_bifurcation": exchange.as_ref().filter(|_| l >= 2).map(|e| e.mode_one_at_bifurcation),
        "points": branch.points.len(),
        "truncated": branch.truncated,
        "endpoint": to_value(&branch.endpoint),
        "message": branch.message,
    })))
}

pub fn validate(config: &Config, linearization: bool, m_max: usize, sink: &Sink) -> Result<(), Failure> {
    let c = boundary_constant(config);
    let mut v = json!({
        "params": to_value(&config.params),
        "discretization": to_value(&config.discretization),
        "rt": to_value(&rt_conditions(&config.params, c)),
        "initial_admissible": config.initial.admissibility(4 * config.discretization.n_modes + 1).admissible,
    });
    let mut failed = None;
    if linearization {
        let report = validate_linearization(&config.params, c, config.disc(), m_max, 1e-5)?;
        if report.max_deviation > LINEARIZATION_TOL {
            failed = Some(format!(
                "linearisation deviation {:.3e} exceeds {LINEARIZATION_TOL:e}",
                report.max_deviation
            ));
        }
        v["linearization"] = json!({
            "m_max": m_max,
            "max_deviation": report.max_deviation,
            "max_leakage": report.max_leakage,
            "entries": to_value(&report.entries),
        });
    }
    io(sink.json(&v))?;
    match failed {
        Some(msg) => Err(Failure::Numerical(msg)),
        None => Ok(()),
    }
}
