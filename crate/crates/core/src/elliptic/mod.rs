//! Transformed elliptic problems on the fixed strips Ω₋ and Ω₊.
//!
//! Both strips are discretised by Fourier collocation in x and
//! Chebyshev-Lobatto collocation in y. Each strip system is assembled densely
//! and factored once per interface pair, so repeated solves with new
//! boundary data are cheap.

mod coeffs;
mod gram;
mod grid;
mod solver;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, Dyn, LU};

pub use coeffs::{assemble_coeffs, lower_coeffs, upper_coeffs, CoeffFields, FluxCoeffs, StripCoeffs, DENOMINATOR_FLOOR};
pub use gram::{gmres, IterativeSolve};
pub use grid::{chebyshev, fourier_diff, Discretization, Grid, Strip};
pub use solver::{LowerProblem, StripField, UpperProblem, SINGULAR_PIVOT_RATIO};

use crate::error::{Error, Result};
use crate::fourier::TrigPoly;
use crate::params::PhysParams;

/// Both strip problems for one interface pair, plus the G-operator.
pub struct TransformedProblem {
    pub params: PhysParams,
    pub lower: LowerProblem,
    pub upper: UpperProblem,
    gram: OnceLock<std::result::Result<LU<f64, Dyn, Dyn>, Error>>,
}

impl TransformedProblem {
    pub fn new(grid: Arc<Grid>, p: &PhysParams, f: &TrigPoly, h: &TrigPoly) -> Result<Self> {
        let (lower, upper) = rayon::join(
            || LowerProblem::new(grid.clone(), p, f),
            || UpperProblem::new(grid.clone(), p, f, h),
        );
        Ok(Self {
            params: *p,
            lower: lower?,
            upper: upper?,
            gram: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.lower.grid()
    }

    /// G(f,h)q = q - B(f,h)S₂(f,h)tr₀T₁(f)q on grid values.
    pub fn gram_apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; q.len()];
        let v = self.lower.solve(q, &zero)?;
        let w = self.upper.solve(&zero, &v.trace_interface())?;
        let flux = self.upper.flux_bottom(&w);
        Ok(q.iter().zip(flux).map(|(a, b)| a - b).collect())
    }

    /// Nodal matrix of G, built column by column from the strip solvers.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let nx = self.grid().nx();
        let traces = self.lower.interface_traces_t1(&DMatrix::identity(nx, nx));
        let fluxes = self.upper.interface_fluxes_s2(&traces);
        DMatrix::identity(nx, nx) - fluxes
    }

    fn gram_lu(&self) -> Result<&LU<f64, Dyn, Dyn>> {
        self.gram
            .get_or_init(|| {
                let lu = self.gram_matrix().lu();
                let d = lu.u().diagonal();
                let lo = d.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
                let hi = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if lo > 1e-10 * hi {
                    Ok(lu)
                } else {
                    Err(Error::SingularSystem {
                        system: "G operator",
                        condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
                    })
                }
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Solves G(f,h)q = rhs by direct factorisation.
    pub fn gram_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.gram_lu()?;
        let x = lu
            .solve(&DVector::from_column_slice(rhs))
            .ok_or(Error::SingularSystem {
                system: "G operator",
                condition: f64::INFINITY,
            })?;
        Ok(x.as_slice().to_vec())
    }

    /// Solves G(f,h)q = rhs by GMRES preconditioned with the inverse of G(0,0).
    pub fn gram_solve_iterative(&self, rhs: &[f64], tol: f64, max_iter: usize) -> Result<IterativeSolve> {
        let precond = self.params.mu_plus / self.params.mu_sum();
        gmres(|q| self.gram_apply(q), rhs, precond, tol, 30, max_iter)
    }

    pub fn flux_lower(&self, v: &StripField) -> Vec<f64> {
        self.lower.flux(v)
    }

    pub fn flux_upper(&self, v: &StripField) -> Vec<f64> {
        self.upper.flux_bottom(v)
    }

    pub fn flux_top(&self, v: &StripField) -> Vec<f64> {
        self.upper.flux_top(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::grid_points;
    use proptest::prelude::*;

    fn params(mu_plus: f64, mu_minus: f64) -> PhysParams {
        PhysParams::new(1.0, 1.0, mu_plus, mu_minus, 1.0, 2.0, 0.0, 0.0)
    }

    fn flat(n: usize, ny: usize, p: &PhysParams) -> TransformedProblem {
        let grid = Arc::new(Grid::new(Discretization::new(n, ny)));
        let z = TrigPoly::zeros(n);
        TransformedProblem::new(grid, p, &z, &z).unwrap()
    }

    fn cos_grid(nx: usize, m: usize) -> Vec<f64> {
        grid_points(nx).iter().map(|x| (m as f64 * x).cos()).collect()
    }

    fn max_dev(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn lower_constant_flux_is_linear_in_y() {
        let p = PhysParams::new(2.0, 1.0, 1.0, 3.0, 1.0, 2.0, 0.0, 0.0);
        let tp = flat(4, 12, &p);
        let nx = 9;
        let v = tp.lower.solve(&vec![0.7; nx], &vec![0.0; nx]).unwrap();
        let y = tp.grid().y(Strip::Lower);
        for i in 0..nx {
            for (j, yj) in y.iter().enumerate() {
                assert!((v.at(i, j) - 1.5 * 0.7 * (1.0 + yj)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lower_trace_of_cosine_flux() {
        let tp = flat(8, 24, &params(1.0, 1.0));
        let nx = 17;
        let v = tp.lower.solve(&cos_grid(nx, 2), &vec![0.0; nx]).unwrap();
        let expect: Vec<f64> = cos_grid(nx, 2).iter().map(|c| 0.4820138 * c).collect();
        assert!(max_dev(&v.trace_interface(), &expect) < 1e-7);
    }

    #[test]
    fn dirichlet_constant_is_reproduced() {
        let tp = flat(4, 10, &params(1.0, 1.0));
        let v = tp.lower.solve(&[0.0; 9], &[1.3; 9]).unwrap();
        assert!(v.values.iter().all(|x| (x - 1.3).abs() < 1e-12));
        let w = tp.upper.solve(&[0.4; 9], &[0.4; 9]).unwrap();
        assert!(w.values.iter().all(|x| (x - 0.4).abs() < 1e-12));
        assert!(tp.flux_top(&w).iter().all(|x| x.abs() < 1e-11));
        assert!(tp.flux_upper(&w).iter().all(|x| x.abs() < 1e-11));
        assert!(tp.flux_lower(&v).iter().all(|x| x.abs() < 1e-11));
    }

    #[test]
    fn closed_form_modes_on_flat_strips() {
        let n = 16;
        let p = PhysParams::new(1.5, 1.0, 2.0, 0.5, 1.0, 2.0, 0.0, 0.0);
        let tp = flat(n, 24, &p);
        let nx = 2 * n + 1;
        let yu = tp.grid().y(Strip::Upper);
        let yl = tp.grid().y(Strip::Lower);
        let zero = vec![0.0; nx];
        for m in 1..=n / 2 {
            let mf = m as f64;
            let c = cos_grid(nx, m);
            // T₁(0)
            let v = tp.lower.solve(&c, &zero).unwrap();
            for i in 0..nx {
                for (j, y) in yl.iter().enumerate() {
                    let exact = p.mu_minus / p.k * (mf * (1.0 + y)).sinh() / (mf * mf.cosh()) * c[i];
                    assert!((v.at(i, j) - exact).abs() < 1e-8, "T1 m={m}");
                }
            }
            // S₂(0,0) and its fluxes
            let w = tp.upper.solve(&zero, &c).unwrap();
            for i in 0..nx {
                for (j, y) in yu.iter().enumerate() {
                    let exact = (mf * (1.0 - y)).sinh() / mf.sinh() * c[i];
                    assert!((w.at(i, j) - exact).abs() < 1e-8, "S2 m={m}");
                }
            }
            let bottom: Vec<f64> = c.iter().map(|x| -p.k / p.mu_plus * mf / mf.tanh() * x).collect();
            let top: Vec<f64> = c.iter().map(|x| p.k / p.mu_plus * mf / mf.sinh() * x).collect();
            assert!(max_dev(&tp.flux_upper(&w), &bottom) < 1e-8 * mf);
            assert!(max_dev(&tp.flux_top(&w), &top) < 1e-8 * mf);
            // S₁(0,0)
            let w = tp.upper.solve(&c, &zero).unwrap();
            for i in 0..nx {
                for (j, y) in yu.iter().enumerate() {
                    let exact = (mf * y).sinh() / mf.sinh() * c[i];
                    assert!((w.at(i, j) - exact).abs() < 1e-8, "S1 m={m}");
                }
            }
        }
    }

    #[test]
    fn gram_at_flat_state_is_scalar() {
        for (mp, mm) in [(1.0, 1.0), (1.0, 2.0), (3.0, 0.5)] {
            let n = 12;
            let tp = flat(n, 24, &params(mp, mm));
            let nx = 2 * n + 1;
            let s = (mp + mm) / mp;
            for m in 0..=n / 2 {
                let q = cos_grid(nx, m);
                let g = tp.gram_apply(&q).unwrap();
                let expect: Vec<f64> = q.iter().map(|x| s * x).collect();
                assert!(max_dev(&g, &expect) <= 1e-8 * s);
            }
            let gm = tp.gram_matrix();
            let dev = (&gm - DMatrix::identity(nx, nx) * s).abs().max();
            assert!(dev < 1e-8 * s, "matrix deviation {dev}");
        }
    }

    #[test]
    fn gram_examples() {
        let tp = flat(6, 16, &params(1.0, 1.0));
        let nx = 13;
        let q: Vec<f64> = cos_grid(nx, 3).iter().map(|c| 2.0 * c).collect();
        let sol = tp.gram_solve(&q).unwrap();
        assert!(max_dev(&sol, &cos_grid(nx, 3)) < 1e-10);
        let tp = flat(6, 16, &params(1.0, 2.0));
        let g = tp.gram_apply(&cos_grid(nx, 1)).unwrap();
        let expect: Vec<f64> = cos_grid(nx, 1).iter().map(|c| 3.0 * c).collect();
        assert!(max_dev(&g, &expect) < 1e-10);
    }

    #[test]
    fn iterative_and_direct_gram_solves_agree() {
        let n = 8;
        let grid = Arc::new(Grid::new(Discretization::new(n, 16)));
        let f = TrigPoly::cosine(n, 1, 0.1) + TrigPoly::sine(n, 2, 0.05);
        let h = TrigPoly::cosine(n, 3, 0.04);
        let tp = TransformedProblem::new(grid, &params(1.0, 2.0), &f, &h).unwrap();
        let rhs = cos_grid(17, 2);
        let direct = tp.gram_solve(&rhs).unwrap();
        let it = tp.gram_solve_iterative(&rhs, 1e-12, 200).unwrap();
        assert!(max_dev(&direct, &it.solution) < 1e-9);
        let back = tp.gram_apply(&direct).unwrap();
        assert!(max_dev(&back, &rhs) < 1e-10);
    }

    #[test]
    fn degenerate_mapping_is_reported() {
        let grid = Arc::new(Grid::new(Discretization::new(4, 8)));
        let f = TrigPoly::constant(4, 0.3);
        let h = TrigPoly::constant(4, -0.7);
        let err = TransformedProblem::new(grid, &params(1.0, 1.0), &f, &h).err().unwrap();
        assert!(matches!(err, Error::DegenerateMapping { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn upper_fluxes_balance(
            f1 in -0.05f64..0.05, f2 in -0.05f64..0.05,
            h1 in -0.05f64..0.05, h2 in -0.05f64..0.05,
            p0 in -1.0f64..1.0, p3 in -1.0f64..1.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0,
        ) {
            let n = 24;
            let nx = 2 * n + 1;
            let grid = Arc::new(Grid::new(Discretization::new(n, 24)));
            let f = TrigPoly::cosine(n, 1, f1) + TrigPoly::sine(n, 2, f2);
            let h = TrigPoly::sine(n, 1, h1) + TrigPoly::cosine(n, 2, h2);
            let up = UpperProblem::new(grid, &params(1.0, 1.0), &f, &h).unwrap();
            let pt = (TrigPoly::constant(n, p0) + TrigPoly::cosine(n, 3, p3)).to_grid(nx);
            let rt = (TrigPoly::sine(n, 1, r1) + TrigPoly::cosine(n, 2, r2)).to_grid(nx);
            let v = up.solve(&pt, &rt).unwrap();
            let total: f64 = up.flux_bottom(&v).iter().zip(up.flux_top(&v)).map(|(a, b)| a + b).sum::<f64>()
                * (2.0 * std::f64::consts::PI / nx as f64);
            prop_assert!(total.abs() <= 1e-9, "flux imbalance {}", total);
        }

        #[test]
        fn lower_solver_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, f1 in -0.2f64..0.2) {
            let n = 6;
            let nx = 13;
            let grid = Arc::new(Grid::new(Discretization::new(n, 12)));
            let f = TrigPoly::cosine(n, 1, f1);
            let lo = LowerProblem::new(grid, &params(1.0, 1.0), &f).unwrap();
            let q1 = cos_grid(nx, 1);
            let q2 = cos_grid(nx, 4);
            let pp = cos_grid(nx, 2);
            let zero = vec![0.0; nx];
            let mix: Vec<f64> = (0..nx).map(|i| a * q1[i] + b * q2[i]).collect();
            let lhs = lo.solve(&mix, &pp).unwrap();
            let v1 = lo.solve(&q1, &zero).unwrap();
            let v2 = lo.solve(&q2, &zero).unwrap();
            let v3 = lo.solve(&zero, &pp).unwrap();
            for k in 0..lhs.values.len() {
                let rhs = a * v1.values[k] + b * v2.values[k] + v3.values[k];
                prop_assert!((lhs.values[k] - rhs).abs() < 1e-11);
            }
        }
    }
}
