use serde::{Deserialize, Serialize};

use super::laplace_young::asymptote_bound;
use super::{require_heavy_on_top, Branch};
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::spectrum::eigenpair;
use crate::symbols::symbol_tilde;

const BISECTION_TOL: f64 = 1e-14;
const DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub l: usize,
    /// g(ρ₊-ρ₋)/l².
    pub gamma_bar: f64,
    /// Sign change of γ_w ↦ Λ₊(l, γ_w) located by bisection.
    pub gamma_bisected: f64,
}

fn bisect_zero(l: usize, p: &PhysParams, guess: f64) -> f64 {
    let lam = |g: f64| eigenpair(l as i64, p, Some(g)).lambda_plus;
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    // Λ₊ > 0 below the bifurcation value and < 0 above it
    while hi - lo > BISECTION_TOL * guess {
        let mid = 0.5 * (lo + hi);
        if lam(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// γ̄_l for l = 1..=l_max with a bisection cross-check on Λ₊(l, ·).
pub fn bifurcation_points(p: &PhysParams, l_max: usize) -> Result<Vec<BifurcationPoint>> {
    require_heavy_on_top(p)?;
    Ok((1..=l_max)
        .map(|l| {
            let gamma_bar = p.buoyancy_jump() / (l * l) as f64;
            BifurcationPoint {
                l,
                gamma_bar,
                gamma_bisected: bisect_zero(l, p, gamma_bar),
            }
        })
        .collect())
}

/// dΛ₊(l, γ_w)/dγ_w at γ̄_l by central differences.
pub fn lambda_prime(l: usize, p: &PhysParams) -> f64 {
    let g = p.buoyancy_jump() / (l * l) as f64;
    let lam = |x: f64| eigenpair(l as i64, p, Some(x)).lambda_plus;
    (lam(g + DERIVATIVE_STEP) - lam(g - DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangePoint {
    pub eps: f64,
    pub gamma_w: f64,
    pub gamma_prime: f64,
    /// -ε γ_l'(ε) λ'(γ̄_l).
    pub mu_est: f64,
    pub unstable: bool,
    /// Λ₊(1, γ_l(ε)), reported for l ≥ 2.
    pub mode_one_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeEstimate {
    pub l: usize,
    pub lambda_prime: f64,
    /// Λ₊(1, γ̄_l), positive for l ≥ 2.
    pub mode_one_at_bifurcation: f64,
    pub points: Vec<ExchangePoint>,
    pub all_unstable: bool,
}

/// Derivative at node i of the quadratic through three neighbouring samples.
fn three_point_derivative(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let c = i.clamp(1, n - 2);
    let (x0, x1, x2) = (x[c - 1], x[c], x[c + 1]);
    let (y0, y1, y2) = (y[c - 1], y[c], y[c + 1]);
    let t = x[i];
    y0 * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Sign of the critical eigenvalue along the branch from the exchange of
/// stability relation μ(ε) ~ -ε γ_l'(ε) λ'(γ̄_l).
pub fn exchange_stability_estimate(branch: &Branch, p: &PhysParams) -> Result<ExchangeEstimate> {
    require_heavy_on_top(p)?;
    if branch.points.len() < 3 {
        return Err(Error::BranchTooShort(format!(
            "{} points, need at least 3 for a derivative estimate",
            branch.points.len()
        )));
    }
    let eps: Vec<f64> = branch.points.iter().map(|pt| pt.eps).collect();
    let gam: Vec<f64> = branch.points.iter().map(|pt| pt.gamma_w).collect();
    let lp = lambda_prime(branch.l, p);
    let points: Vec<ExchangePoint> = (0..eps.len())
        .filter(|i| eps[*i] != 0.0)
        .map(|i| {
            let gp = three_point_derivative(&eps, &gam, i);
            let mu = -eps[i] * gp * lp;
            ExchangePoint {
                eps: eps[i],
                gamma_w: gam[i],
                gamma_prime: gp,
                mu_est: mu,
                unstable: mu > 0.0,
                mode_one_rate: (branch.l >= 2).then(|| eigenpair(1, p, Some(gam[i])).lambda_plus),
            }
        })
        .collect();
    Ok(ExchangeEstimate {
        l: branch.l,
        lambda_prime: lp,
        mode_one_at_bifurcation: eigenpair(1, p, Some(branch.gamma_bar)).lambda_plus,
        all_unstable: points.iter().all(|pt| pt.unstable),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub l: usize,
    pub bound: f64,
    /// Whether the branch reaches |ε| ≥ 0.5.
    pub applicable: bool,
    pub max_gamma_beyond: Option<f64>,
    pub max_gamma: f64,
    pub holds: bool,
}

/// Checks γ ≤ 2π² g(ρ₊-ρ₋)/(B(3/4,1/2)² l²) for every sample with |ε| ≥ 0.5.
pub fn branch_asymptote_check(branch: &Branch, p: &PhysParams) -> AsymptoteReport {
    let bound = asymptote_bound(p, branch.l);
    let beyond = branch
        .points
        .iter()
        .filter(|pt| pt.eps.abs() >= 0.5)
        .map(|pt| pt.gamma_w)
        .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
    let max_gamma = branch.points.iter().map(|pt| pt.gamma_w).fold(f64::NEG_INFINITY, f64::max);
    AsymptoteReport {
        l: branch.l,
        bound,
        applicable: beyond.is_some(),
        max_gamma_beyond: beyond,
        max_gamma,
        holds: beyond.is_none_or(|g| g < bound),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCokernelReport {
    pub l: usize,
    pub gamma_bar: f64,
    /// Tilde symbol matrix at wavenumber l and γ_w = γ̄_l.
    pub matrix: [[f64; 2]; 2],
    /// Null vector normalised to first component 1.
    pub null_vector: [f64; 2],
    pub null_residual: f64,
    /// Direction spanning the range, normalised to first component 1.
    pub range_direction: [f64; 2],
    /// (1, -(μ₊(cosh²l - cosh l) + μ₋(cosh²l - 1))/(μ₊ cosh l)).
    pub reference_direction: [f64; 2],
    pub direction_mismatch: f64,
    pub det_below: f64,
    pub det_above: f64,
    pub rank_below: usize,
    pub rank_above: usize,
}

fn rank2(m: &[[f64; 2]; 2]) -> usize {
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() > 1e-12 * scale * scale {
        2
    } else {
        1
    }
}

/// Kernel and range of the tilde symbol at the l-th bifurcation point.
pub fn kernel_cokernel_check(l: usize, p: &PhysParams) -> Result<KernelCokernelReport> {
    require_heavy_on_top(p)?;
    let gamma_bar = p.buoyancy_jump() / (l * l) as f64;
    let at = |g: f64| symbol_tilde(l as i64, &p.with_gamma_w(g)).matrix();
    let m = at(gamma_bar);
    // the second column never vanishes, so the first is a multiple of it
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let null_vector = [1.0, -m[0][0] / m[0][1]];
    let null_residual = (m[1][0] + m[1][1] * null_vector[1]).abs().max((m[0][0] + m[0][1] * null_vector[1]).abs()) / scale;
    let range_direction = [1.0, m[1][1] / m[0][1]];
    let lf = l as f64;
    let (c, mp, mm) = (lf.cosh(), p.mu_plus, p.mu_minus);
    let reference_direction = [1.0, -(mp * (c * c - c) + mm * (c * c - 1.0)) / (mp * c)];
    let dm = at(gamma_bar - 0.01);
    let dp = at(gamma_bar + 0.01);
    let det = |a: &[[f64; 2]; 2]| a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Ok(KernelCokernelReport {
        l,
        gamma_bar,
        matrix: m,
        null_vector,
        null_residual,
        range_direction,
        reference_direction,
        direction_mismatch: (range_direction[1] - reference_direction[1]).abs(),
        det_below: det(&dm),
        det_above: det(&dp),
        rank_below: rank2(&dm),
        rank_above: rank2(&dp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::continue_branch_with;

    fn p1() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0)
    }

    #[test]
    fn bifurcation_values_and_bisection() {
        let pts = bifurcation_points(&p1(), 5).unwrap();
        let expect = [1.0, 0.25, 1.0 / 9.0, 1.0 / 16.0, 0.04];
        for (pt, e) in pts.iter().zip(expect) {
            assert!((pt.gamma_bar - e).abs() < 1e-15);
            assert!((pt.gamma_bisected - e).abs() < 1e-10);
        }
        assert!(pts.windows(2).all(|w| w[1].gamma_bar < w[0].gamma_bar));
    }

    #[test]
    fn lambda_prime_fixture() {
        let lp = lambda_prime(1, &p1());
        assert!(lp < 0.0);
        assert!((lp + 0.482014).abs() < 1e-5, "{lp}");
    }

    #[test]
    fn kernel_is_diagonal_direction() {
        let r = kernel_cokernel_check(1, &p1()).unwrap();
        assert!((r.null_vector[1] - 1.0).abs() < 1e-10);
        assert!(r.null_residual < 1e-12);
        assert!((r.reference_direction[1] + 1.438107).abs() < 1e-6);
        assert!(r.direction_mismatch < 1e-12);
        assert_eq!((r.rank_below, r.rank_above), (2, 2));
    }

    #[test]
    fn kernel_for_higher_modes_and_viscosity_contrast() {
        let mut p = p1();
        p.mu_plus = 3.0;
        p.mu_minus = 0.5;
        for l in 1..=4 {
            let r = kernel_cokernel_check(l, &p).unwrap();
            assert!((r.null_vector[1] - 1.0).abs() < 1e-10);
            assert!(r.direction_mismatch < 1e-9 * r.reference_direction[1].abs());
        }
    }

    #[test]
    fn small_fingers_are_unstable() {
        let b = continue_branch_with(1, 0.2, 0.02, &p1(), 24).unwrap();
        let est = exchange_stability_estimate(&b, &p1()).unwrap();
        assert!(est.all_unstable);
        let first = est.points[0];
        assert!((first.mu_est / (first.eps * first.eps) - 0.361511).abs() < 0.01);
    }

    #[test]
    fn higher_branches_report_mode_one_growth() {
        let b = continue_branch_with(2, 0.1, 0.025, &p1(), 24).unwrap();
        let est = exchange_stability_estimate(&b, &p1()).unwrap();
        assert!(est.mode_one_at_bifurcation > 0.0);
        assert!(est.points.iter().all(|pt| pt.mode_one_rate.unwrap() > 0.0));
    }

    #[test]
    fn short_branch_is_rejected() {
        let mut b = continue_branch_with(1, 0.02, 0.02, &p1(), 8).unwrap();
        b.points.truncate(2);
        assert!(matches!(exchange_stability_estimate(&b, &p1()), Err(Error::BranchTooShort(_))));
    }

    #[test]
    fn asymptote_not_applicable_on_short_branch() {
        let b = continue_branch_with(1, 0.1, 0.05, &p1(), 8).unwrap();
        let r = branch_asymptote_check(&b, &p1());
        assert!(!r.applicable && r.holds);
    }
}
