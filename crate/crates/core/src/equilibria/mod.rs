//! Finger-shaped steady states γ_w κ(f) + g(ρ₊-ρ₋) f = 0, their branches
//! bifurcating from the flat state and the instability of those branches.

mod laplace_young;
mod stability;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysParams;

pub use laplace_young::{
    asymptote_bound, beta, first_integral, laplace_young_residual, residual_and_jacobian, residual_grid,
    CosineBasis, Profile,
};
pub use stability::{
    bifurcation_points, branch_asymptote_check, exchange_stability_estimate, kernel_cokernel_check,
    lambda_prime, AsymptoteReport, BifurcationPoint, ExchangeEstimate, ExchangePoint, KernelCokernelReport,
};

pub const DEFAULT_COEFFS: usize = 64;
pub const NEWTON_MAX_ITER: usize = 50;
pub const MAX_HALVINGS: usize = 5;
pub const QUADRATIC_FIT_WINDOW: f64 = 0.15;
const CORRECTOR_MAX_ITER: usize = 12;
const NEWTON_TOL: f64 = 1e-13;
const AMPLITUDE_LIMIT: f64 = 0.9;
const SLOPE_LIMIT: f64 = 1e2;
/// Grid residual above which a branch point is re-solved with more modes.
pub const RESOLUTION_TOL: f64 = 1e-11;
pub const MAX_COEFFS: usize = 512;

/// One sample on an equilibrium branch. `f_coeffs[k]` is the amplitude of
/// cos(l(k+1)x); `eps = f_coeffs[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub l: usize,
    pub gamma_w: f64,
    pub eps: f64,
    pub f_coeffs: Vec<f64>,
    pub residual_norm: f64,
    pub first_integral_spread: f64,
    pub max_f: f64,
    pub max_fprime: f64,
    pub iterations: usize,
    pub trivial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    AmplitudeNearOne,
    SlopeBlowUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub l: usize,
    pub gamma_bar: f64,
    pub points: Vec<BranchPoint>,
    pub fitted_quadratic: Option<f64>,
    pub truncated: bool,
    pub endpoint: Option<Endpoint>,
    pub message: Option<String>,
}

impl Branch {
    /// Full trig polynomial of the finger at sample `i`, resolved to its degree.
    pub fn profile(&self, i: usize) -> crate::TrigPoly {
        let pt = &self.points[i];
        CosineBasis::new(self.l, pt.f_coeffs.len()).poly(&pt.f_coeffs)
    }
}

fn require_heavy_on_top(p: &PhysParams) -> Result<()> {
    if p.buoyancy_jump() <= 0.0 {
        return Err(Error::InvalidInput(
            "finger equilibria need the denser fluid on top (rho_plus > rho_minus)".into(),
        ));
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn make_point(basis: &CosineBasis, gamma_w: f64, a: &[f64], p: &PhysParams, iterations: usize) -> BranchPoint {
    let pr = basis.profile(a);
    let e = first_integral(basis, gamma_w, a, p);
    let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let max_f = sup(&pr.f);
    BranchPoint {
        l: basis.l,
        gamma_w,
        eps: a[0],
        f_coeffs: a.to_vec(),
        residual_norm: sup(&residual_grid(basis, gamma_w, a, p)),
        first_integral_spread: hi - lo,
        max_f,
        max_fprime: sup(&pr.d1),
        iterations,
        trivial: max_f < 1e-12,
    }
}

/// Newton iteration at fixed γ_w over the even, mean-zero cosine modes
/// 1..=f_init.len().
pub fn solve_finger(gamma_w: f64, f_init: &[f64], p: &PhysParams, tol: f64) -> Result<BranchPoint> {
    require_heavy_on_top(p)?;
    if !(gamma_w > 0.0) || f_init.is_empty() {
        return Err(Error::InvalidInput("need gamma_w > 0 and at least one cosine mode".into()));
    }
    let basis = CosineBasis::new(1, f_init.len());
    let mut a = DVector::from_column_slice(f_init);
    let mut last = f64::INFINITY;
    for it in 0..NEWTON_MAX_ITER {
        let (r, j, _) = residual_and_jacobian(&basis, gamma_w, a.as_slice(), p);
        last = r.amax();
        if last <= tol {
            return Ok(make_point(&basis, gamma_w, a.as_slice(), p, it));
        }
        let da = j.lu().solve(&r).ok_or(Error::SingularSystem {
            system: "Laplace-Young Newton",
            condition: f64::INFINITY,
        })?;
        a -= da;
        if !a.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: last,
    })
}

/// Newton corrector on (γ_w, a) with the extra row `c·x = target`.
fn correct(
    basis: &CosineBasis,
    x0: &DVector<f64>,
    c: &DVector<f64>,
    target: f64,
    p: &PhysParams,
) -> Option<(DVector<f64>, usize)> {
    let k = basis.n_coeffs;
    let mut x = x0.clone();
    for it in 0..CORRECTOR_MAX_ITER {
        let (r, j, rg) = residual_and_jacobian(basis, x[0], &x.as_slice()[1..], p);
        let cons = c.dot(&x) - target;
        if r.amax() <= NEWTON_TOL && cons.abs() <= NEWTON_TOL {
            return Some((x, it));
        }
        let mut m = DMatrix::zeros(k + 1, k + 1);
        m.view_mut((0, 0), (k, 1)).copy_from(&rg);
        m.view_mut((0, 1), (k, k)).copy_from(&j);
        m.row_mut(k).copy_from(&c.transpose());
        let mut rhs = DVector::zeros(k + 1);
        rhs.rows_mut(0, k).copy_from(&r);
        rhs[k] = cons;
        let dx = m.lu().solve(&rhs)?;
        x -= &dx;
        if !x.iter().all(|v| v.is_finite()) || x[0] <= 0.0 || x.rows(1, k).amax() > 2.0 {
            return None;
        }
    }
    let (r, _, _) = residual_and_jacobian(basis, x[0], &x.as_slice()[1..], p);
    (r.amax() <= 10.0 * NEWTON_TOL).then_some((x, CORRECTOR_MAX_ITER))
}

/// Unit tangent of the branch at x, oriented along `prev`.
fn tangent(basis: &CosineBasis, x: &DVector<f64>, prev: &DVector<f64>, p: &PhysParams) -> Option<DVector<f64>> {
    let k = basis.n_coeffs;
    let (_, j, rg) = residual_and_jacobian(basis, x[0], &x.as_slice()[1..], p);
    let mut m = DMatrix::zeros(k + 1, k + 1);
    m.view_mut((0, 0), (k, 1)).copy_from(&rg);
    m.view_mut((0, 1), (k, k)).copy_from(&j);
    m.row_mut(k).copy_from(&prev.transpose());
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let t = m.lu().solve(&rhs)?;
    Some(t.normalize())
}

fn padded(x: &DVector<f64>, len: usize) -> DVector<f64> {
    let mut out = DVector::zeros(len);
    out.rows_mut(0, x.len()).copy_from(x);
    out
}

/// Re-solves (γ_w, a) at fixed ε with doubled resolution until the grid
/// residual drops below [`RESOLUTION_TOL`].
fn refine(
    basis: &mut CosineBasis,
    y: DVector<f64>,
    point: BranchPoint,
    p: &PhysParams,
) -> std::result::Result<(DVector<f64>, BranchPoint), BranchPoint> {
    let (mut y, mut point) = (y, point);
    while point.residual_norm > RESOLUTION_TOL {
        if basis.n_coeffs >= MAX_COEFFS {
            return Err(point);
        }
        let next = CosineBasis::new(basis.l, (2 * basis.n_coeffs).min(MAX_COEFFS));
        let start = padded(&y, next.n_coeffs + 1);
        let mut c = DVector::zeros(next.n_coeffs + 1);
        c[1] = 1.0;
        let Some((z, it)) = correct(&next, &start, &c, y[1], p) else {
            return Err(point);
        };
        point = make_point(&next, z[0], &z.as_slice()[1..], p, it);
        y = z;
        *basis = next;
    }
    Ok((y, point))
}

/// Finger of the l-th branch with prescribed amplitude ε, starting from
/// `guess` = (γ_w, a) or from the small-amplitude expansion.
pub fn solve_at_amplitude(
    l: usize,
    eps: f64,
    p: &PhysParams,
    n_coeffs: usize,
    guess: Option<(f64, &[f64])>,
) -> Result<BranchPoint> {
    require_heavy_on_top(p)?;
    let basis = CosineBasis::new(l, n_coeffs);
    let mut x = DVector::zeros(n_coeffs + 1);
    match guess {
        Some((g, a)) => {
            x[0] = g;
            for (i, v) in a.iter().take(n_coeffs).enumerate() {
                x[i + 1] = *v;
            }
        }
        None => {
            x[0] = p.buoyancy_jump() / (l * l) as f64 + 0.375 * p.buoyancy_jump() * eps * eps;
            x[1] = eps;
        }
    }
    x[1] = eps;
    let mut c = DVector::zeros(n_coeffs + 1);
    c[1] = 1.0;
    let (x, it) = correct(&basis, &x, &c, eps, p).ok_or(Error::NoConvergence {
        iterations: CORRECTOR_MAX_ITER,
        residual: f64::NAN,
    })?;
    Ok(make_point(&basis, x[0], &x.as_slice()[1..], p, it))
}

/// Least-squares c in γ - γ̄ = c ε² over the points with |ε| ≤ window.
pub fn fit_quadratic(points: &[BranchPoint], gamma_bar: f64, window: f64) -> Option<f64> {
    let (num, den, n) = points
        .iter()
        .filter(|pt| pt.eps != 0.0 && pt.eps.abs() <= window)
        .fold((0.0, 0.0, 0), |(a, b, n), pt| {
            let e2 = pt.eps * pt.eps;
            (a + (pt.gamma_w - gamma_bar) * e2, b + e2 * e2, n + 1)
        });
    (n >= 2).then(|| num / den)
}

/// Pseudo-arclength continuation of the l-th branch from (γ̄_l, 0) until
/// |ε| = |eps_max|; the sign of eps_max selects the direction.
pub fn continue_branch(l: usize, eps_max: f64, step: f64, p: &PhysParams) -> Result<Branch> {
    continue_branch_with(l, eps_max, step, p, DEFAULT_COEFFS)
}

pub fn continue_branch_with(l: usize, eps_max: f64, step: f64, p: &PhysParams, n_coeffs: usize) -> Result<Branch> {
    require_heavy_on_top(p)?;
    if l == 0 || eps_max == 0.0 || !(step > 0.0) || n_coeffs == 0 {
        return Err(Error::InvalidInput("need l ≥ 1, eps_max ≠ 0, step > 0".into()));
    }
    let mut basis = CosineBasis::new(l, n_coeffs);
    let gamma_bar = p.buoyancy_jump() / (l * l) as f64;
    let dir = eps_max.signum();
    let target = eps_max.abs();

    let mut x = DVector::zeros(n_coeffs + 1);
    x[0] = gamma_bar;
    let mut t = DVector::zeros(n_coeffs + 1);
    t[1] = dir;
    let mut points = vec![make_point(&basis, gamma_bar, &x.as_slice()[1..], p, 0)];
    let mut h = step;
    let mut halvings: usize = 0;
    let mut truncated = false;
    let mut endpoint = None;
    let mut message = None;

    loop {
        let pred = &x + &t * h;
        let step_result = if pred[1] * dir >= target {
            // land exactly on the requested amplitude
            let mut c = DVector::zeros(x.len());
            c[1] = 1.0;
            let mut start = x.clone() + &t * ((eps_max - x[1]) / t[1]);
            start[1] = eps_max;
            correct(&basis, &start, &c, eps_max, p).map(|(y, it)| (y, it, true))
        } else {
            let target_arc = t.dot(&pred);
            correct(&basis, &pred, &t, target_arc, p).map(|(y, it)| (y, it, false))
        };
        match step_result {
            Some((y, it, last)) if (y[1] - x[1]) * dir > 0.0 => {
                let pt = make_point(&basis, y[0], &y.as_slice()[1..], p, it);
                let (y, pt) = match refine(&mut basis, y, pt, p) {
                    Ok(v) => v,
                    Err(bad) => {
                        truncated = true;
                        message = Some(format!(
                            "finger at eps = {:.6} not resolved with {} modes (residual {:.2e})",
                            bad.eps, basis.n_coeffs, bad.residual_norm
                        ));
                        break;
                    }
                };
                if t.len() != y.len() {
                    t = padded(&t, y.len());
                }
                let over = if pt.max_f > AMPLITUDE_LIMIT {
                    Some(Endpoint::AmplitudeNearOne)
                } else if pt.max_fprime > SLOPE_LIMIT {
                    Some(Endpoint::SlopeBlowUp)
                } else {
                    None
                };
                if over.is_some() {
                    endpoint = over;
                    truncated = !last;
                    message = Some(format!(
                        "stopped at eps = {:.6}: max|f| = {:.4}, max|f'| = {:.4}",
                        pt.eps, pt.max_f, pt.max_fprime
                    ));
                    break;
                }
                points.push(pt);
                if last {
                    break;
                }
                let t_new = tangent(&basis, &y, &t, p).unwrap_or_else(|| t.clone());
                x = y;
                t = t_new;
                if it <= 3 && h < step {
                    h = (2.0 * h).min(step);
                    halvings = halvings.saturating_sub(1);
                }
            }
            _ => {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    truncated = true;
                    let last = points.last().unwrap();
                    endpoint = if last.max_fprime > 0.5 * SLOPE_LIMIT {
                        Some(Endpoint::SlopeBlowUp)
                    } else if last.max_f > 0.5 * AMPLITUDE_LIMIT {
                        Some(Endpoint::AmplitudeNearOne)
                    } else {
                        None
                    };
                    message = Some(format!(
                        "step failure after {MAX_HALVINGS} halvings at eps = {:.6}",
                        last.eps
                    ));
                    break;
                }
                h *= 0.5;
            }
        }
    }
    let fitted_quadratic = fit_quadratic(&points, gamma_bar, QUADRATIC_FIT_WINDOW);
    Ok(Branch {
        l,
        gamma_bar,
        points,
        fitted_quadratic,
        truncated,
        endpoint,
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0)
    }

    #[test]
    fn rejects_light_fluid_on_top() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 0.0);
        assert!(continue_branch(1, 0.1, 0.02, &p).is_err());
        assert!(solve_finger(1.0, &[0.1], &p, 1e-12).is_err());
    }

    #[test]
    fn trivial_solution_above_first_bifurcation() {
        let mut init = vec![0.0; 16];
        init[0] = 0.05;
        init[2] = -0.01;
        let pt = solve_finger(1.5, &init, &p1(), 1e-12).unwrap();
        assert!(pt.trivial);
        assert!(pt.f_coeffs.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn branch_matches_small_amplitude_expansion() {
        let b = continue_branch_with(1, 0.1, 0.02, &p1(), 32).unwrap();
        assert!(!b.truncated);
        let last = b.points.last().unwrap();
        assert_eq!(last.eps, 0.1);
        assert!((last.gamma_w - 1.00375).abs() < 1e-4, "{}", last.gamma_w);
        let c = b.fitted_quadratic.unwrap();
        assert!((c / 0.375 - 1.0).abs() < 0.02, "{c}");
        for pt in &b.points {
            assert!(pt.residual_norm <= 1e-10);
            assert!(pt.first_integral_spread <= 1e-8);
            assert!(pt.gamma_w >= b.gamma_bar);
        }
    }

    #[test]
    fn branch_is_even_in_amplitude() {
        let up = continue_branch_with(2, 0.1, 0.02, &p1(), 32).unwrap();
        let down = continue_branch_with(2, -0.1, 0.02, &p1(), 32).unwrap();
        let (a, b) = (up.points.last().unwrap(), down.points.last().unwrap());
        assert_eq!(b.eps, -0.1);
        assert!((a.gamma_w - b.gamma_w).abs() < 1e-10);
    }

    #[test]
    fn newton_recovers_continued_finger() {
        let b = continue_branch_with(1, 0.2, 0.05, &p1(), 32).unwrap();
        let target = b.points.last().unwrap();
        let mut init = vec![0.0; 32];
        init[0] = 0.2;
        let pt = solve_finger(target.gamma_w, &init, &p1(), 1e-12).unwrap();
        assert!(!pt.trivial);
        assert!((pt.eps - 0.2).abs() < 1e-8);
        assert!(pt.residual_norm <= 1e-10);
    }

    #[test]
    fn higher_branches_are_rescaled_first_branch() {
        let one = solve_at_amplitude(1, 0.2, &p1(), 32, None).unwrap();
        let two = solve_at_amplitude(2, 0.1, &p1(), 32, None).unwrap();
        assert!((two.gamma_w - one.gamma_w / 4.0).abs() < 1e-12);
        assert!((two.f_coeffs[1] - one.f_coeffs[1] / 2.0).abs() < 1e-12);
    }

    #[test]
    fn steep_fingers_trigger_refinement() {
        let b = continue_branch_with(2, 0.8, 0.05, &p1(), 32).unwrap();
        assert_eq!(b.points.last().unwrap().eps, 0.8);
        assert!(b.points.last().unwrap().f_coeffs.len() > 32);
        assert!(b.points.iter().all(|pt| pt.residual_norm <= RESOLUTION_TOL));
    }

    #[test]
    fn steady_finger_has_no_upper_motion() {
        use crate::elliptic::Discretization;
        use crate::evolution::VectorField;
        use crate::TrigPoly;
        let b = continue_branch_with(1, 0.2, 0.05, &p1(), 32).unwrap();
        let pt = b.points.last().unwrap();
        let p = p1().with_gamma_w(pt.gamma_w);
        let field = VectorField::new(p, Discretization { n_modes: 32, n_y: 24 });
        let f = b.profile(b.points.len() - 1).resized(32);
        let phi = field
            .eval(&f, &TrigPoly::zeros(32), &TrigPoly::constant(32, p.equilibrium_potential()))
            .unwrap();
        assert!(phi.phi2.max_abs(65) < 1e-7, "{}", phi.phi2.max_abs(65));
        assert!(phi.phi1.max_abs(65) < 1e-7, "{}", phi.phi1.max_abs(65));
    }

    #[test]
    fn fit_on_exact_parabola() {
        let pts: Vec<BranchPoint> = [0.05, 0.1, 0.15, 0.3]
            .iter()
            .map(|e| BranchPoint {
                l: 1,
                gamma_w: 1.0 + 0.4 * e * e,
                eps: *e,
                f_coeffs: vec![*e],
                residual_norm: 0.0,
                first_integral_spread: 0.0,
                max_f: *e,
                max_fprime: *e,
                iterations: 0,
                trivial: false,
            })
            .collect();
        assert!((fit_quadratic(&pts, 1.0, 0.15).unwrap() - 0.4).abs() < 1e-14);
    }
}
