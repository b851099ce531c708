use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Discretization, Grid, TransformedProblem};
use crate::error::Result;
use crate::fourier::{curvature, TrigPoly};
use crate::params::PhysParams;
use crate::state::BoundaryData;
use crate::symbols::symbol_general;

/// Evaluates the vector field Φ = (Φ₁, Φ₂) of the transformed system on a
/// fixed discretisation.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub params: PhysParams,
    grid: Arc<Grid>,
}

/// Φ₁ and Φ₂ at one state, as polynomials of the grid degree.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiValue {
    pub phi1: TrigPoly,
    pub phi2: TrigPoly,
}

impl VectorField {
    pub fn new(params: PhysParams, disc: Discretization) -> Self {
        Self {
            params,
            grid: Arc::new(Grid::new(disc)),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    /// Φ₁ and Φ₂ with b(.,t) given as a polynomial.
    pub fn eval(&self, f: &TrigPoly, h: &TrigPoly, b: &TrigPoly) -> Result<PhiValue> {
        let (g1, g2) = self.eval_grid(f, h, b)?;
        let n = self.n_modes();
        Ok(PhiValue {
            phi1: TrigPoly::from_grid(&g1, n),
            phi2: TrigPoly::from_grid(&g2, n),
        })
    }

    /// Φ₁ and Φ₂ as values on the x collocation grid.
    pub fn eval_grid(&self, f: &TrigPoly, h: &TrigPoly, b: &TrigPoly) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = &self.params;
        let n = self.n_modes();
        let nx = self.grid.nx();
        let f = f.resized(n);
        let h = h.resized(n);
        let tp = TransformedProblem::new(self.grid.clone(), p, &f, &h)?;

        let fg = f.to_grid(nx);
        let hg = h.to_grid(nx);
        let kf = curvature(&f).to_grid(nx);
        let kh = curvature(&h).to_grid(nx);
        let bg = b.resized(n).to_grid(nx);
        let zero = vec![0.0; nx];

        let p_top: Vec<f64> = (0..nx)
            .map(|i| p.g * p.rho_plus * (1.0 + hg[i]) - p.gamma_d * kh[i])
            .collect();
        let jump: Vec<f64> = (0..nx)
            .map(|i| p.buoyancy_jump() * fg[i] + p.gamma_w * kf[i])
            .collect();

        let v0 = tp.lower.solve(&zero, &bg)?;
        let r0: Vec<f64> = v0.trace_interface().iter().zip(&jump).map(|(a, b)| a + b).collect();
        let w0 = tp.upper.solve(&p_top, &r0)?;
        let rhs: Vec<f64> = tp.flux_upper(&w0).iter().map(|v| -v).collect();
        let phi1 = tp.gram_solve(&rhs)?;

        let minus: Vec<f64> = phi1.iter().map(|v| -v).collect();
        let vm = tp.lower.solve(&minus, &bg)?;
        let r: Vec<f64> = vm.trace_interface().iter().zip(&jump).map(|(a, b)| a + b).collect();
        let wp = tp.upper.solve(&p_top, &r)?;
        let phi2 = tp.flux_top(&wp);
        Ok((phi1, phi2))
    }

    pub fn phi1(&self, t: f64, f: &TrigPoly, h: &TrigPoly, b: &BoundaryData) -> Result<TrigPoly> {
        Ok(self.eval(f, h, &b.at(t, self.n_modes()))?.phi1)
    }

    pub fn phi2(&self, t: f64, f: &TrigPoly, h: &TrigPoly, b: &BoundaryData) -> Result<TrigPoly> {
        Ok(self.eval(f, h, &b.at(t, self.n_modes()))?.phi2)
    }

    /// Ψ₁ = Φ₁(f, f - f̃) and Ψ₂ = Φ₁ - Φ₂ in the variables (f, f̃ = f - h).
    pub fn psi(&self, f: &TrigPoly, f_tilde: &TrigPoly, b: &TrigPoly) -> Result<(TrigPoly, TrigPoly)> {
        let h = f - f_tilde;
        let v = self.eval(f, &h, b)?;
        let psi2 = &v.phi1 - &v.phi2;
        Ok((v.phi1, psi2))
    }
}

/// One of the four partial derivatives of Φ at the flat state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    /// ∂_f Φ₁ against λ₁^f.
    F1,
    /// ∂_f Φ₂ against λ₂^f.
    F2,
    /// ∂_h Φ₁ against λ₁^h.
    H1,
    /// ∂_h Φ₂ against λ₂^h.
    H2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationEntry {
    pub m: usize,
    pub block: Block,
    pub numerical: f64,
    pub symbol: f64,
    pub deviation: f64,
    /// Largest coefficient of the response outside mode m.
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub entries: Vec<LinearizationEntry>,
    pub max_deviation: f64,
    pub max_leakage: f64,
}

fn relative(num: f64, exact: f64, scale: f64) -> f64 {
    // entries that vanish identically are compared against the block scale
    let denom = if exact.abs() > 1e-12 * scale { exact.abs() } else { scale };
    (num - exact).abs() / denom
}

/// Richardson-extrapolated central differences of Φ at the flat state in the
/// directions cos(mx) of f and of h, compared with the closed-form symbols
/// for b ≡ c.
pub fn validate_linearization(
    p: &PhysParams,
    c: f64,
    disc: Discretization,
    m_max: usize,
    fd_step: f64,
) -> Result<LinearizationReport> {
    let field = VectorField::new(*p, disc);
    let n = disc.n_modes;
    let b = TrigPoly::constant(n, c);
    let zero = TrigPoly::zeros(n);

    let diff = |dir_f: bool, m: usize, eps: f64| -> Result<PhiValue> {
        let d = TrigPoly::cosine(n, m, 1.0);
        let (fp, hp, fm, hm) = if dir_f {
            (d.scaled(eps), zero.clone(), d.scaled(-eps), zero.clone())
        } else {
            (zero.clone(), d.scaled(eps), zero.clone(), d.scaled(-eps))
        };
        let plus = field.eval(&fp, &hp, &b)?;
        let minus = field.eval(&fm, &hm, &b)?;
        let s = 0.5 / eps;
        Ok(PhiValue {
            phi1: (&plus.phi1 - &minus.phi1).scaled(s),
            phi2: (&plus.phi2 - &minus.phi2).scaled(s),
        })
    };

    let jobs: Vec<(usize, bool)> = (0..=m_max.min(n)).flat_map(|m| [(m, true), (m, false)]).collect();
    let results: Vec<Result<Vec<LinearizationEntry>>> = jobs
        .par_iter()
        .map(|&(m, dir_f)| {
            let coarse = diff(dir_f, m, fd_step)?;
            let fine = diff(dir_f, m, 0.5 * fd_step)?;
            let extrap = |a: &TrigPoly, b: &TrigPoly| (&b.scaled(4.0) - a).scaled(1.0 / 3.0);
            let d1 = extrap(&coarse.phi1, &fine.phi1);
            let d2 = extrap(&coarse.phi2, &fine.phi2);
            let q = symbol_general(m as i64, p, c);
            let scale = [q.lam_f1, q.lam_f2, q.lam_h1, q.lam_h2]
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            let (pairs, blocks) = if dir_f {
                ([(d1, q.lam_f1), (d2, q.lam_f2)], [Block::F1, Block::F2])
            } else {
                ([(d1, q.lam_h1), (d2, q.lam_h2)], [Block::H1, Block::H2])
            };
            Ok(pairs
                .into_iter()
                .zip(blocks)
                .map(|((resp, sym), block)| {
                    let numerical = resp.cos_amp(m);
                    let leakage = (0..=n)
                        .filter(|&k| k != m)
                        .map(|k| resp.coeff(k as i64).norm())
                        .chain(std::iter::once(resp.sin_amp(m).abs()))
                        .fold(0.0, f64::max);
                    LinearizationEntry {
                        m,
                        block,
                        numerical,
                        symbol: sym,
                        deviation: relative(numerical, sym, scale),
                        leakage,
                    }
                })
                .collect())
        })
        .collect();

    let mut entries = Vec::new();
    for r in results {
        entries.extend(r?);
    }
    entries.sort_by_key(|e| (e.m, e.block as u8));
    let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
    let max_leakage = entries.iter().map(|e| e.leakage).fold(0.0, f64::max);
    Ok(LinearizationReport {
        entries,
        max_deviation,
        max_leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p0() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0)
    }

    fn field(p: PhysParams) -> VectorField {
        VectorField::new(p, Discretization::new(8, 16))
    }

    #[test]
    fn flat_state_velocity_is_constant() {
        let v = field(p0());
        let z = TrigPoly::zeros(8);
        let out = v.eval(&z, &z, &TrigPoly::constant(8, 1.2)).unwrap();
        assert!((out.phi1.mean() - 0.1).abs() < 1e-12);
        assert!((out.phi2.mean() - 0.1).abs() < 1e-12);
        assert!(out.phi1.resized(8).coeffs().iter().enumerate().all(|(i, c)| i == 8 || c.norm() < 1e-12));
        let eq = v.eval(&z, &z, &TrigPoly::constant(8, 1.0)).unwrap();
        assert!(eq.phi1.coeff_norm_inf() < 1e-12);
        assert!(eq.phi2.coeff_norm_inf() < 1e-12);
    }

    #[test]
    fn viscosity_contrast_flat_velocity() {
        let p = PhysParams::new(2.0, 1.0, 3.0, 1.0, 1.0, 2.0, 0.5, 0.2);
        let v = field(p);
        let z = TrigPoly::zeros(8);
        let out = v.eval(&z, &z, &TrigPoly::constant(8, 0.4)).unwrap();
        let expect = p.k * (0.4 - p.g * p.rho_plus) / p.mu_sum();
        assert!((out.phi1.mean() - expect).abs() < 1e-12);
        assert!((out.phi2.mean() - expect).abs() < 1e-12);
    }

    #[test]
    fn raised_flat_state_matches_scalar_ode() {
        let p = PhysParams::new(1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 0.0, 0.0);
        let v = field(p);
        let a = 0.15;
        let s = TrigPoly::constant(8, a);
        let out = v.eval(&s, &s, &TrigPoly::constant(8, 1.3)).unwrap();
        let rhs = -(p.k * p.g * p.rho_minus / p.mu_minus) * (a + (p.g * p.rho_plus - 1.3) / (p.g * p.rho_minus))
            / (a + p.mu_sum() / p.mu_minus);
        assert!((out.phi1.mean() - rhs).abs() < 1e-12);
        assert!((out.phi2.mean() - rhs).abs() < 1e-12);
    }

    #[test]
    fn volume_flux_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut p = p0();
        p.gamma_w = 0.3;
        p.gamma_d = 0.1;
        let v = VectorField::new(p, Discretization::new(12, 20));
        for _ in 0..10 {
            let mut f = TrigPoly::constant(12, rng.gen_range(-0.05..0.05));
            let mut h = TrigPoly::constant(12, rng.gen_range(-0.05..0.05));
            for m in 1..=3 {
                f = f + TrigPoly::cosine(12, m, rng.gen_range(-0.03..0.03)) + TrigPoly::sine(12, m, rng.gen_range(-0.03..0.03));
                h = h + TrigPoly::cosine(12, m, rng.gen_range(-0.03..0.03)) + TrigPoly::sine(12, m, rng.gen_range(-0.03..0.03));
            }
            let (_, psi2) = v.psi(&f, &(&f - &h), &TrigPoly::constant(12, rng.gen_range(0.8..1.2))).unwrap();
            assert!(psi2.mean().abs() < 1e-10, "mean Ψ₂ = {}", psi2.mean());
        }
    }

    #[test]
    fn even_data_give_even_velocities() {
        let mut p = p0();
        p.gamma_w = 0.2;
        let v = field(p);
        let f = TrigPoly::cosine(8, 1, 0.1) + TrigPoly::cosine(8, 2, -0.04);
        let h = TrigPoly::cosine(8, 3, 0.05);
        let out = v.eval(&f, &h, &TrigPoly::constant(8, 1.0)).unwrap();
        assert!(out.phi1.odd_part_norm() < 1e-10);
        assert!(out.phi2.odd_part_norm() < 1e-10);
    }

    #[test]
    fn interface_normal_velocity_is_continuous() {
        // Φ₁ is the flux on Γ₀ from above and from below
        let mut p = p0();
        p.mu_plus = 2.0;
        let v = field(p);
        let f = TrigPoly::cosine(8, 1, 0.1);
        let h = TrigPoly::sine(8, 2, 0.05);
        let b = TrigPoly::constant(8, 1.1);
        let n = 8;
        let tp = TransformedProblem::new(v.grid().clone(), &p, &f, &h).unwrap();
        let (phi1, _) = v.eval_grid(&f, &h, &b).unwrap();
        let minus: Vec<f64> = phi1.iter().map(|x| -x).collect();
        let vm = tp.lower.solve(&minus, &b.resized(n).to_grid(17)).unwrap();
        let flux = tp.flux_lower(&vm);
        for i in 0..17 {
            assert!((flux[i] + phi1[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn linearization_reproduces_symbols() {
        let r = validate_linearization(&p0(), 1.0, Discretization::new(16, 20), 8, 1e-5).unwrap();
        assert_eq!(r.entries.len(), 36);
        assert!(r.max_deviation <= 1e-3, "deviation {}", r.max_deviation);
        assert!(r.max_leakage <= 1e-8, "leakage {}", r.max_leakage);
    }

    #[test]
    fn linearization_with_surface_tension_and_contrast() {
        let p = PhysParams::new(1.3, 0.8, 2.0, 1.0, 1.0, 1.5, 0.2, 0.1);
        let r = validate_linearization(&p, 1.1, Discretization::new(12, 20), 4, 1e-5).unwrap();
        assert!(r.max_deviation <= 1e-3, "deviation {}", r.max_deviation);
        let h1 = r.entries.iter().find(|e| e.m == 2 && e.block == Block::H1).unwrap();
        assert!((h1.numerical - h1.symbol).abs() <= 1e-3 * h1.symbol.abs());
    }
}
