use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coeffs::{lower_coeffs, upper_coeffs, FluxCoeffs, StripCoeffs};
use super::grid::{Grid, Strip};
use crate::error::{Error, Result};
use crate::fourier::TrigPoly;
use crate::params::PhysParams;

/// Ratio of smallest to largest pivot below which a system counts as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// Grid values of a scalar field on one reference strip, indexed (x, y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripField {
    pub strip: Strip,
    pub n_modes: usize,
    pub n_y: usize,
    /// Row-major (2N+1) × M values; entry i·M + j is (x_i, y_j).
    pub values: Vec<f64>,
}

impl StripField {
    fn from_solution(strip: Strip, grid: &Grid, col: &[f64]) -> Self {
        Self {
            strip,
            n_modes: grid.n_modes(),
            n_y: grid.ny(),
            values: col.to_vec(),
        }
    }

    pub fn nx(&self) -> usize {
        2 * self.n_modes + 1
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_y + j]
    }

    fn row(&self, j: usize) -> Vec<f64> {
        (0..self.nx()).map(|i| self.at(i, j)).collect()
    }

    /// Trace on Γ₀ (y = 0).
    pub fn trace_interface(&self) -> Vec<f64> {
        match self.strip {
            Strip::Lower => self.row(0),
            Strip::Upper => self.row(self.n_y - 1),
        }
    }

    /// Trace on the outer boundary, Γ₋₁ for the lower strip and Γ₁ for the
    /// upper one.
    pub fn trace_outer(&self) -> Vec<f64> {
        match self.strip {
            Strip::Lower => self.row(self.n_y - 1),
            Strip::Upper => self.row(0),
        }
    }

    /// Column of values at x_i, ordered from the top of the strip down.
    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_y..(i + 1) * self.n_y]
    }
}

#[derive(Clone, Copy)]
enum RowKind<'a> {
    Dirichlet,
    Flux(&'a FluxCoeffs),
}

fn assemble(grid: &Grid, c: &StripCoeffs, top: RowKind, bottom: RowKind) -> DMatrix<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let n = nx * ny;
    let mut rows = vec![0.0; n * n];
    rows.par_chunks_mut(ny * n).enumerate().for_each(|(i, block)| {
        for j in 0..ny {
            let row = &mut block[j * n..(j + 1) * n];
            let kind = if j == 0 {
                Some(top)
            } else if j == ny - 1 {
                Some(bottom)
            } else {
                None
            };
            match kind {
                Some(RowKind::Dirichlet) => row[i * ny + j] = 1.0,
                Some(RowKind::Flux(fc)) => {
                    for jj in 0..ny {
                        row[i * ny + jj] += fc.cy[i] * grid.dy[(j, jj)];
                    }
                    for ii in 0..nx {
                        row[ii * ny + j] += fc.cx[i] * grid.dx[(i, ii)];
                    }
                }
                None => {
                    let (axy, ayy, ay) = (c.axy[(i, j)], c.ayy[(i, j)], c.ay[(i, j)]);
                    for ii in 0..nx {
                        row[ii * ny + j] += grid.dxx[(i, ii)];
                        let dxi = axy * grid.dx[(i, ii)];
                        if dxi != 0.0 {
                            for jj in 0..ny {
                                row[ii * ny + jj] += dxi * grid.dy[(j, jj)];
                            }
                        }
                    }
                    for jj in 0..ny {
                        row[i * ny + jj] += ayy * grid.dyy[(j, jj)] + ay * grid.dy[(j, jj)];
                    }
                }
            }
        }
    });
    DMatrix::from_row_slice(n, n, &rows)
}

fn factor(a: DMatrix<f64>, system: &'static str) -> Result<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in u.diagonal().iter() {
        lo = lo.min(d.abs());
        hi = hi.max(d.abs());
    }
    if !(lo > SINGULAR_PIVOT_RATIO * hi) {
        return Err(Error::SingularSystem {
            system,
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    Ok(lu)
}

fn flux_of(grid: &Grid, fc: &FluxCoeffs, v: &StripField, j: usize) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    (0..nx)
        .map(|i| {
            let col = v.column(i);
            let dy: f64 = (0..ny).map(|jj| grid.dy[(j, jj)] * col[jj]).sum();
            let dx: f64 = (0..nx).map(|ii| grid.dx[(i, ii)] * v.at(ii, j)).sum();
            fc.cy[i] * dy + fc.cx[i] * dx
        })
        .collect()
}

fn check_len(name: &str, v: &[f64], nx: usize) -> Result<()> {
    if v.len() != nx {
        return Err(Error::InvalidInput(format!(
            "{name} has {} samples, expected {nx}",
            v.len()
        )));
    }
    Ok(())
}

/// u_L(x, y) = a(x) + η(y)·s(x) with η affine and η' = 1.
struct AffineLift {
    da: Vec<f64>,
    dda: Vec<f64>,
    ds: Vec<f64>,
    dds: Vec<f64>,
    s: Vec<f64>,
}

impl AffineLift {
    fn new(grid: &Grid, a: &[f64], s: &[f64]) -> Self {
        let d = |v: &[f64]| -> Vec<f64> {
            let n = v.len();
            (0..n).map(|i| (0..n).map(|k| grid.dx[(i, k)] * v[k]).sum()).collect()
        };
        let dd = |v: &[f64]| -> Vec<f64> {
            let n = v.len();
            (0..n).map(|i| (0..n).map(|k| grid.dxx[(i, k)] * v[k]).sum()).collect()
        };
        Self {
            da: d(a),
            dda: dd(a),
            ds: d(s),
            dds: dd(s),
            s: s.to_vec(),
        }
    }

    /// A u_L at (x_i, y_j) where η(y_j) = eta.
    fn residual(&self, c: &StripCoeffs, i: usize, j: usize, eta: f64) -> f64 {
        self.dda[i] + eta * self.dds[i] + c.axy[(i, j)] * self.ds[i] + c.ay[(i, j)] * self.s[i]
    }
}

/// Factored discretisation of the mixed problem A(f)v = 0, B(f)v = q on Γ₀,
/// v = p on Γ₋₁.
pub struct LowerProblem {
    grid: Arc<Grid>,
    coeffs: StripCoeffs,
    flux: FluxCoeffs,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl LowerProblem {
    pub fn new(grid: Arc<Grid>, p: &PhysParams, f: &TrigPoly) -> Result<Self> {
        let (c, flux) = lower_coeffs(&grid, p, f)?;
        let a = assemble(&grid, &c, RowKind::Flux(&flux), RowKind::Dirichlet);
        let lu = factor(a, "lower strip")?;
        Ok(Self {
            grid,
            coeffs: c,
            flux,
            lu,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// T(f, q, p) for grid data q on Γ₀ and p on Γ₋₁.
    ///
    /// The data are first lifted to u_L = p + (1+y)·q/c_y, whose residual is
    /// evaluated in closed form; only the correction goes through the
    /// factorisation, so rounding scales with the correction.
    pub fn solve(&self, q: &[f64], p: &[f64]) -> Result<StripField> {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx(), grid.ny());
        check_len("q", q, nx)?;
        check_len("p", p, nx)?;
        let s: Vec<f64> = (0..nx).map(|i| q[i] / self.flux.cy[i]).collect();
        let lift = AffineLift::new(grid, p, &s);
        let y = grid.y(Strip::Lower);
        let mut rhs = DVector::zeros(nx * ny);
        for i in 0..nx {
            for j in 1..ny - 1 {
                rhs[i * ny + j] = -lift.residual(&self.coeffs, i, j, 1.0 + y[j]);
            }
            let bu = self.flux.cy[i] * s[i] + self.flux.cx[i] * (lift.da[i] + lift.ds[i]);
            rhs[i * ny] = q[i] - bu;
        }
        let x = self.lu.solve(&rhs).ok_or(Error::SingularSystem {
            system: "lower strip",
            condition: f64::INFINITY,
        })?;
        let mut values = x.as_slice().to_vec();
        for i in 0..nx {
            for j in 0..ny {
                values[i * ny + j] += p[i] + (1.0 + y[j]) * s[i];
            }
        }
        Ok(StripField::from_solution(Strip::Lower, grid, &values))
    }

    /// Traces tr₀T₁(f)q for every column q of `qs` (each of length 2N+1).
    pub fn interface_traces_t1(&self, qs: &DMatrix<f64>) -> DMatrix<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let k = qs.ncols();
        let mut rhs = DMatrix::zeros(nx * ny, k);
        for c in 0..k {
            for i in 0..nx {
                rhs[(i * ny, c)] = qs[(i, c)];
            }
        }
        let sol = self.lu.solve(&rhs).expect("factorisation checked at construction");
        DMatrix::from_fn(nx, k, |i, c| sol[(i * ny, c)])
    }

    /// B(f)v on Γ₀.
    pub fn flux(&self, v: &StripField) -> Vec<f64> {
        flux_of(&self.grid, &self.flux, v, 0)
    }

    pub fn solve_poly(&self, q: &TrigPoly, p: &TrigPoly) -> Result<StripField> {
        let nx = self.grid.nx();
        let n = self.grid.n_modes();
        self.solve(&q.resized(n).to_grid(nx), &p.resized(n).to_grid(nx))
    }
}

/// Factored discretisation of the Dirichlet problem A(f,h)v = 0, v = p on
/// Γ₁, v = r on Γ₀.
pub struct UpperProblem {
    grid: Arc<Grid>,
    coeffs: StripCoeffs,
    flux_bottom: FluxCoeffs,
    flux_top: FluxCoeffs,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl UpperProblem {
    pub fn new(grid: Arc<Grid>, p: &PhysParams, f: &TrigPoly, h: &TrigPoly) -> Result<Self> {
        let (c, flux_bottom, flux_top) = upper_coeffs(&grid, p, f, h)?;
        let a = assemble(&grid, &c, RowKind::Dirichlet, RowKind::Dirichlet);
        let lu = factor(a, "upper strip")?;
        Ok(Self {
            grid,
            coeffs: c,
            flux_bottom,
            flux_top,
            lu,
        })
    }

    /// S(f, h, p, r) for grid data p on Γ₁ and r on Γ₀, solved for the
    /// correction to the affine interpolant r + y(p - r).
    pub fn solve(&self, p: &[f64], r: &[f64]) -> Result<StripField> {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx(), grid.ny());
        check_len("p", p, nx)?;
        check_len("r", r, nx)?;
        let s: Vec<f64> = (0..nx).map(|i| p[i] - r[i]).collect();
        let lift = AffineLift::new(grid, r, &s);
        let y = grid.y(Strip::Upper);
        let mut rhs = DVector::zeros(nx * ny);
        for i in 0..nx {
            for j in 1..ny - 1 {
                rhs[i * ny + j] = -lift.residual(&self.coeffs, i, j, y[j]);
            }
        }
        let x = self.lu.solve(&rhs).ok_or(Error::SingularSystem {
            system: "upper strip",
            condition: f64::INFINITY,
        })?;
        let mut values = x.as_slice().to_vec();
        for i in 0..nx {
            for j in 0..ny {
                values[i * ny + j] += r[i] + y[j] * s[i];
            }
        }
        Ok(StripField::from_solution(Strip::Upper, grid, &values))
    }

    /// B(f,h)S₂(f,h)r for every column r of `rs`.
    pub fn interface_fluxes_s2(&self, rs: &DMatrix<f64>) -> DMatrix<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let k = rs.ncols();
        let mut rhs = DMatrix::zeros(nx * ny, k);
        for c in 0..k {
            for i in 0..nx {
                rhs[(i * ny + ny - 1, c)] = rs[(i, c)];
            }
        }
        let sol = self.lu.solve(&rhs).expect("factorisation checked at construction");
        let mut out = DMatrix::zeros(nx, k);
        for c in 0..k {
            let field = StripField::from_solution(Strip::Upper, &self.grid, sol.column(c).as_slice());
            for (i, v) in self.flux_bottom(&field).into_iter().enumerate() {
                out[(i, c)] = v;
            }
        }
        out
    }

    /// B(f,h)v on Γ₀.
    pub fn flux_bottom(&self, v: &StripField) -> Vec<f64> {
        flux_of(&self.grid, &self.flux_bottom, v, self.grid.ny() - 1)
    }

    /// B₁(f,h)v on Γ₁.
    pub fn flux_top(&self, v: &StripField) -> Vec<f64> {
        flux_of(&self.grid, &self.flux_top, v, 0)
    }

    pub fn solve_poly(&self, p: &TrigPoly, r: &TrigPoly) -> Result<StripField> {
        let nx = self.grid.nx();
        let n = self.grid.n_modes();
        self.solve(&p.resized(n).to_grid(nx), &r.resized(n).to_grid(nx))
    }
}
