//! Fourier multiplier symbols of the linearised two-interface problem.
//!
//! At a flat state with constant bottom potential `c`, the Fréchet derivative
//! of the vector field acts on each wavenumber `m` through the 2×2 matrix
//!
//! ```text
//! [ lam_f1  lam_h1 ]
//! [ lam_f2  lam_h2 ]
//! ```
//!
//! (row 1: rate of f, row 2: rate of h; column 1: response to f, column 2:
//! response to h). All hyperbolic factors are evaluated in forms that neither
//! overflow for large `m` nor divide by zero at `m = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysParams;

/// Multiplier values at one integer wavenumber.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolQuad {
    pub lam_f1: f64,
    pub lam_f2: f64,
    pub lam_h1: f64,
    pub lam_h2: f64,
}

impl SymbolQuad {
    /// Row-major 2×2 matrix acting on (f̂(m), ĥ(m)).
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.lam_f1, self.lam_h1], [self.lam_f2, self.lam_h2]]
    }

    pub fn trace(&self) -> f64 {
        self.lam_f1 + self.lam_h2
    }

    pub fn det(&self) -> f64 {
        self.lam_f1 * self.lam_h2 - self.lam_h1 * self.lam_f2
    }
}

/// m / tanh(m), equal to 1 at m = 0.
pub(crate) fn m_coth(m: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else {
        m / m.tanh()
    }
}

/// m / sinh(m), equal to 1 at m = 0.
pub(crate) fn m_csch(m: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else if m < 20.0 {
        m / m.sinh()
    } else {
        let e = (-m).exp();
        2.0 * m * e / (1.0 - e * e)
    }
}

/// 1 / cosh(m).
pub(crate) fn sech(m: f64) -> f64 {
    let e = (-m).exp();
    2.0 * e / (1.0 + e * e)
}

/// Symbols for a general constant bottom potential `c`.
pub fn symbol_general(m: i64, p: &PhysParams, c: f64) -> SymbolQuad {
    let a = m.unsigned_abs() as f64;
    let s = p.mu_sum();
    let a2 = a * a;
    let grho_p = p.g * p.rho_plus;
    let coth = m_coth(a);
    let csch = m_csch(a);

    let lam_f1 = (p.atwood() * (c - grho_p) + p.buoyancy_jump() - p.gamma_w * a2) * p.k * coth / s;
    let lam_f2 = ((c * (p.mu_plus - p.mu_minus) + 2.0 * grho_p * p.mu_minus) / s
        - p.g * p.rho_minus
        - p.gamma_w * a2)
        * p.k
        * csch
        / s;
    let top = (grho_p * p.mu_minus + c * p.mu_plus) / s + p.gamma_d * a2;
    let lam_h1 = -top * p.k * csch / s;
    let lam_h2 = -top * p.k * coth / p.mu_plus - p.mu_minus / p.mu_plus * lam_h1 * sech(a);

    SymbolQuad {
        lam_f1,
        lam_f2,
        lam_h1,
        lam_h2,
    }
}

/// Symbols at the equilibrium potential c = gρ₊, from the simplified closed
/// forms. Uses (μ₋(cosh²m - 1) + μ₊cosh²m)/(sinh m cosh m) = μ₋ tanh m + μ₊ coth m.
pub fn symbol_equilibrium(m: i64, p: &PhysParams) -> SymbolQuad {
    let a = m.unsigned_abs() as f64;
    let s = p.mu_sum();
    let a2 = a * a;
    let lower = p.g * (p.rho_minus - p.rho_plus) + p.gamma_w * a2;
    let upper = p.g * p.rho_plus + p.gamma_d * a2;
    let coth = m_coth(a);
    let csch = m_csch(a);
    let mixed = (p.mu_minus * a * a.tanh() + p.mu_plus * coth) / p.mu_plus;

    SymbolQuad {
        lam_f1: -lower * p.k * coth / s,
        lam_f2: -lower * p.k * csch / s,
        lam_h1: -upper * p.k * csch / s,
        lam_h2: -upper * p.k / s * mixed,
    }
}

/// Symbols in the variables (f, f̃ = f - h), equilibrium potential.
///
/// Returned with the same matrix layout as [`SymbolQuad::matrix`]:
/// `lam_f1` = λ̃₁^f, `lam_h1` = λ̃₁^{f̃}, `lam_f2` = λ̃₂^f, `lam_h2` = λ̃₂^{f̃}.
pub fn symbol_tilde(m: i64, p: &PhysParams) -> SymbolQuad {
    let q = symbol_equilibrium(m, p);
    if m == 0 {
        // the mean of f̃ is conserved, so the second row vanishes identically
        return SymbolQuad {
            lam_f1: -p.k * p.g * p.rho_minus / p.mu_sum(),
            lam_h1: -q.lam_h1,
            lam_f2: 0.0,
            lam_h2: 0.0,
        };
    }
    SymbolQuad {
        lam_f1: q.lam_f1 + q.lam_h1,
        lam_h1: -q.lam_h1,
        lam_f2: q.lam_f1 + q.lam_h1 - q.lam_f2 - q.lam_h2,
        lam_h2: -q.lam_h1 + q.lam_h2,
    }
}

/// Sign conditions that make the problem parabolic without surface tension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTReport {
    /// c·μ₊ + gρ₊μ₋ (must be positive).
    pub cond1_value: f64,
    pub cond1_holds: bool,
    /// A_μ(c - gρ₊) + g(ρ₊ - ρ₋) (must be negative).
    pub cond2_value: f64,
    pub cond2_holds: bool,
    #[serde(rename = "parabolic")]
    pub parabolic_without_st: bool,
    /// Parabolicity once surface tension is accounted for: γ_d > 0 waives
    /// the first condition, γ_w > 0 the second.
    pub parabolic_with_st: bool,
}

pub fn rt_conditions(p: &PhysParams, c: f64) -> RTReport {
    let cond1_value = c * p.mu_plus + p.g * p.rho_plus * p.mu_minus;
    let cond2_value = p.atwood() * (c - p.g * p.rho_plus) + p.buoyancy_jump();
    let cond1_holds = cond1_value > 0.0;
    let cond2_holds = cond2_value < 0.0;
    RTReport {
        cond1_value,
        cond1_holds,
        cond2_value,
        cond2_holds,
        parabolic_without_st: cond1_holds && cond2_holds,
        parabolic_with_st: (cond1_holds || p.gamma_d > 0.0) && (cond2_holds || p.gamma_w > 0.0),
    }
}

/// Optimal bottom pressure and the matching potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureBound {
    pub p_max: f64,
    pub b_max: f64,
}

pub fn p_max(p: &PhysParams) -> Result<PressureBound> {
    let a = p.atwood();
    if a == 0.0 {
        return Err(Error::Undefined("undefined for equal viscosities"));
    }
    let p_max = p.g * (p.rho_plus + p.rho_minus) - p.buoyancy_jump() / a;
    Ok(PressureBound {
        p_max,
        b_max: p_max - p.g * p.rho_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0)
    }

    #[test]
    fn zero_mode_limit_of_general_symbol() {
        let mut p = p0();
        p.mu_plus = 3.0;
        p.gamma_w = 0.7;
        let c = 1.7;
        let expected = (p.atwood() * (c - p.g * p.rho_plus) + p.buoyancy_jump()) * p.k / p.mu_sum();
        assert!((symbol_general(0, &p, c).lam_f1 - expected).abs() < 1e-15);
    }

    #[test]
    fn unit_mode_values_for_reference_params() {
        // tanh 1 = 0.7615942, sinh 1 = 1.1752012, cosh 1 = 1.5430806
        let q = symbol_general(1, &p0(), 1.0);
        assert!((q.lam_f1 + 0.6565176).abs() < 1e-6);
        assert!((q.lam_f2 + 0.4254590).abs() < 1e-6);
        assert!((q.lam_h1 + 0.4254590).abs() < 1e-6);
        assert!((q.lam_h2 + 1.0373148).abs() < 1e-6);
        let e = symbol_equilibrium(1, &p0());
        assert!((e.lam_f1 + 0.6565176).abs() < 1e-6);
    }

    #[test]
    fn symbols_are_even_in_wavenumber() {
        let mut p = p0();
        p.gamma_w = 0.3;
        p.gamma_d = 0.2;
        for m in 1..=16 {
            assert_eq!(symbol_general(m, &p, 1.3), symbol_general(-m, &p, 1.3));
            assert_eq!(symbol_equilibrium(m, &p), symbol_equilibrium(-m, &p));
        }
    }

    #[test]
    fn equilibrium_zero_mode() {
        assert!((symbol_equilibrium(0, &p0()).lam_f1 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn tilde_symbols_at_zero_and_one() {
        let t0 = symbol_tilde(0, &p0());
        assert!((t0.lam_f1 + 1.0).abs() < 1e-15);
        assert_eq!(t0.lam_f2, 0.0);
        let t1 = symbol_tilde(1, &p0());
        assert!((t1.lam_f1 + 1.0819766).abs() < 1e-6);
    }

    #[test]
    fn determinant_instance() {
        let q = symbol_equilibrium(1, &p0());
        assert!((q.det() - 0.5).abs() < 1e-12);
        assert!((q.lam_f1 * q.lam_h2 - 0.681015).abs() < 1e-6);
    }

    #[test]
    fn large_wavenumbers_do_not_overflow() {
        let mut p = p0();
        p.gamma_w = 1.0;
        p.gamma_d = 1.0;
        for m in [700, 800, 5000] {
            let q = symbol_general(m, &p, 1.0);
            assert!(q.lam_f1.is_finite() && q.lam_f2.is_finite());
            assert!(q.lam_h1.is_finite() && q.lam_h2.is_finite());
            assert!(q.lam_f2.abs() < 1e-200);
        }
    }

    #[test]
    fn surface_tension_dominates_high_modes() {
        let mut p = p0();
        p.gamma_w = 0.5;
        let m = 64;
        let q = symbol_equilibrium(m, &p);
        let asym = -p.gamma_w * p.k * (m as f64).powi(3) / p.mu_sum();
        assert!((q.lam_f1 / asym - 1.0).abs() < 0.05);
    }

    #[test]
    fn rt_reference_case_is_parabolic() {
        let r = rt_conditions(&p0(), 1.0);
        assert_eq!(r.cond1_value, 2.0);
        assert_eq!(r.cond2_value, -1.0);
        assert!(r.parabolic_without_st);
    }

    #[test]
    fn rt_dense_fluid_on_top_is_not_parabolic() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 0.0, 0.0);
        let r = rt_conditions(&p, 2.0);
        assert_eq!(r.cond2_value, 1.0);
        assert!(!r.parabolic_without_st);
        assert!(rt_conditions(&p.with_gamma_w(0.1), 2.0).parabolic_with_st);
    }

    #[test]
    fn rt_first_condition_is_strict() {
        let mut p = p0();
        p.mu_plus = 2.0;
        let c = -p.g * p.rho_plus * p.mu_minus / p.mu_plus;
        let r = rt_conditions(&p, c);
        assert_eq!(r.cond1_value, 0.0);
        assert!(!r.cond1_holds);
    }

    #[test]
    fn optimal_pressure_water_under_oil() {
        let p = PhysParams::new(1.0, 1.0, 5.0, 1.0, 0.8, 1.0, 0.0, 0.0);
        let b = p_max(&p).unwrap();
        assert!((b.p_max - 2.1).abs() < 1e-12);
        assert!((b.b_max - 1.1).abs() < 1e-12);
    }

    #[test]
    fn optimal_pressure_equal_densities() {
        let p = PhysParams::new(1.0, 2.0, 5.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        assert_eq!(p_max(&p).unwrap().p_max, 4.0);
    }

    #[test]
    fn optimal_pressure_needs_viscosity_contrast() {
        let err = p_max(&p0()).unwrap_err();
        assert_eq!(err.to_string(), "undefined for equal viscosities");
    }
}
