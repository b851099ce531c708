//! Eigenvalues of the linearisation at the flat equilibrium and the
//! resulting stability classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::symbols::{symbol_equilibrium, SymbolQuad};

pub const DEFAULT_M_MAX: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEigenpair {
    pub m: i64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub trace: f64,
    pub det: f64,
    /// Set when the discriminant is negative; both lambdas then hold the
    /// common real part.
    pub complex_pair: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: PhysParams,
    pub eigenpairs: Vec<ModeEigenpair>,
    pub isolated_eigenvalue: f64,
    pub spectral_bound: f64,
    pub classification: Classification,
    pub tail_decaying: bool,
    pub warnings: Vec<String>,
}

/// Eigenvalues of a real 2×2 matrix given by its symbol quad.
pub fn eigen_of(m: i64, q: &SymbolQuad) -> ModeEigenpair {
    let trace = q.trace();
    let det = q.det();
    let diff = q.lam_f1 - q.lam_h2;
    let disc = diff * diff + 4.0 * q.lam_h1 * q.lam_f2;
    let (lambda_plus, lambda_minus, complex_pair) = if disc < 0.0 {
        (0.5 * trace, 0.5 * trace, true)
    } else {
        let root = disc.sqrt();
        // pair the larger-magnitude root with the sign of the trace and
        // recover the other one from the determinant
        if trace < 0.0 {
            let minus = 0.5 * (trace - root);
            (det / minus, minus, false)
        } else if trace > 0.0 {
            let plus = 0.5 * (trace + root);
            (plus, det / plus, false)
        } else {
            (0.5 * root, -0.5 * root, false)
        }
    };
    ModeEigenpair {
        m,
        lambda_plus,
        lambda_minus,
        trace,
        det,
        complex_pair,
    }
}

/// Λ±(m) at the equilibrium potential, optionally with γ_w replaced.
pub fn eigenpair(m: i64, p: &PhysParams, gamma_w_override: Option<f64>) -> ModeEigenpair {
    let p = match gamma_w_override {
        Some(g) => p.with_gamma_w(g),
        None => *p,
    };
    eigen_of(m, &symbol_equilibrium(m, &p))
}

/// -k g ρ₋ / (μ₊ + μ₋), the eigenvalue carried by the mean of f.
pub fn isolated_eigenvalue(p: &PhysParams) -> f64 {
    -p.k * p.g * p.rho_minus / p.mu_sum()
}

pub fn spectrum_report(p: &PhysParams, m_max: usize) -> Result<SpectrumReport> {
    if m_max < 1 {
        return Err(Error::InvalidInput("m_max must be at least 1".into()));
    }
    let eigenpairs: Vec<ModeEigenpair> = (1..=m_max as i64)
        .into_par_iter()
        .map(|m| eigenpair(m, p, None))
        .collect();
    let isolated = isolated_eigenvalue(p);
    let spectral_bound = eigenpairs
        .iter()
        .map(|e| e.lambda_plus)
        .fold(isolated, f64::max);

    let scale = eigenpairs
        .iter()
        .map(|e| e.lambda_minus.abs())
        .fold(isolated.abs(), f64::max);
    let classification = if spectral_bound.abs() <= 1e-13 * scale {
        Classification::Marginal
    } else if spectral_bound < 0.0 {
        Classification::Stable
    } else {
        Classification::Unstable
    };

    let mut warnings = Vec::new();
    let tail_decaying = if m_max >= 2 {
        let last = eigenpairs[m_max - 1].lambda_plus;
        let prev = eigenpairs[m_max - 2].lambda_plus;
        last < prev && last < 0.0
    } else {
        false
    };
    if classification == Classification::Stable && !tail_decaying {
        warnings.push(format!(
            "Λ₊ is not visibly decaying at m_max = {m_max}; the truncation may hide the bound"
        ));
    }
    if eigenpairs.iter().any(|e| e.complex_pair) {
        warnings.push("complex-conjugate eigenvalue pairs present; real parts reported".into());
    }

    Ok(SpectrumReport {
        params: *p,
        eigenpairs,
        isolated_eigenvalue: isolated,
        spectral_bound,
        classification,
        tail_decaying,
        warnings,
    })
}

/// Admissible exponential decay rate ω = 0.99·|spectral bound| for a stable
/// flat state.
pub fn decay_rate_bound(p: &PhysParams, m_max: usize) -> Result<f64> {
    let report = spectrum_report(p, m_max)?;
    match report.classification {
        Classification::Stable => Ok(-0.99 * report.spectral_bound),
        _ => Err(Error::NotStable {
            spectral_bound: report.spectral_bound,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::symbol_tilde;

    fn p0() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0)
    }

    fn p1() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 0.0, 0.0)
    }

    #[test]
    fn stable_reference_eigenvalues() {
        let e = eigenpair(1, &p0(), None);
        assert!((e.lambda_plus + 0.3807971).abs() < 1e-6);
        assert!((e.lambda_minus + 1.3130353).abs() < 1e-6);
        assert!((e.trace + 1.6938324).abs() < 1e-6);
        assert!((e.lambda_plus * e.lambda_minus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unstable_reference_eigenvalues() {
        let e = eigenpair(1, &p1(), None);
        assert!((e.lambda_plus - 0.516816).abs() < 1e-5);
        assert!((e.lambda_minus + 1.934928).abs() < 1e-5);
        assert!((e.lambda_plus * e.lambda_minus + 1.0).abs() < 1e-5);
    }

    #[test]
    fn eigenvalue_vanishes_at_bifurcation_value() {
        let p = p1();
        for l in 1..=6i64 {
            let gbar = p.buoyancy_jump() / (l * l) as f64;
            let e = eigenpair(l, &p, Some(gbar));
            assert!(e.lambda_plus.abs() < 1e-14, "l = {l}: {}", e.lambda_plus);
        }
    }

    #[test]
    fn sum_and_product_match_trace_and_det() {
        let mut p = p0();
        p.gamma_w = 0.3;
        p.gamma_d = 0.1;
        for m in 1..=40 {
            let e = eigenpair(m, &p, None);
            assert!(e.lambda_minus <= e.lambda_plus);
            let s = e.lambda_plus + e.lambda_minus;
            let d = e.lambda_plus * e.lambda_minus;
            assert!((s - e.trace).abs() <= 1e-10 * e.trace.abs());
            assert!((d - e.det).abs() <= 1e-10 * e.det.abs());
        }
    }

    #[test]
    fn tilde_matrix_is_similar() {
        let mut p = p0();
        p.gamma_d = 0.4;
        for m in 1..=16 {
            let a = eigenpair(m, &p, None);
            let b = eigen_of(m, &symbol_tilde(m, &p));
            assert!((a.lambda_plus - b.lambda_plus).abs() < 1e-10);
            assert!((a.lambda_minus - b.lambda_minus).abs() < 1e-10);
        }
    }

    #[test]
    fn complex_window_is_flagged() {
        // trace² - 4 det < 0 needs a positive product λ₁^h λ₂^f large enough;
        // build the quad directly to exercise the branch
        let q = SymbolQuad {
            lam_f1: -1.0,
            lam_f2: -2.0,
            lam_h1: 2.0,
            lam_h2: -1.0,
        };
        let e = eigen_of(3, &q);
        assert!(e.complex_pair);
        assert_eq!(e.lambda_plus, -1.0);
    }

    #[test]
    fn reference_report_bound_at_first_mode() {
        let r = spectrum_report(&p0(), 64).unwrap();
        assert_eq!(r.classification, Classification::Stable);
        assert!((r.spectral_bound + 0.3807971).abs() < 1e-6);
        assert!((r.eigenpairs[1].lambda_plus + 0.9640).abs() < 1e-4);
        assert!(r.tail_decaying);
        assert_eq!(r.isolated_eigenvalue, -1.0);
    }

    #[test]
    fn unstable_report() {
        let r = spectrum_report(&p1(), 32).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        assert!((r.eigenpairs[0].lambda_plus - 0.516816).abs() < 1e-5);
    }

    #[test]
    fn decay_rate_examples() {
        let w0 = decay_rate_bound(&p0(), 64).unwrap();
        assert!((w0 - 0.99 * 0.3807971).abs() < 1e-6);
        let w1 = decay_rate_bound(&p0().with_gamma_w(1.0), 64).unwrap();
        assert!(w1 > w0);
        let marginal = p1().with_gamma_w(1.0);
        let err = decay_rate_bound(&marginal, 64).unwrap_err();
        assert!(matches!(err, Error::NotStable { .. }));
    }
}
