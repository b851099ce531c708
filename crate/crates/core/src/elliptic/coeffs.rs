//! Variable coefficients of the pulled-back Laplacian and boundary fluxes.
//!
//! The lower fluid domain {-1 < Y < f(x)} is mapped onto Ω₋ by
//! Y = y + (1+y)f(x), the upper domain {f < Y < 1+h} onto Ω₊ by
//! Y = y(1+h) + (1-y)f. In the fixed variables the Laplacian becomes
//! ∂xx + a_xy ∂xy + a_yy ∂yy + a_y ∂y and each flux through an interface
//! becomes c_y ∂y + c_x ∂x on one boundary row.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, Strip};
use crate::error::{Error, Result};
use crate::fourier::TrigPoly;
use crate::params::PhysParams;

/// Smallest allowed value of 1+f and 1+h-f on the collocation grid.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Second- and first-order coefficients on one strip, indexed (x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct StripCoeffs {
    pub strip: Strip,
    pub axy: DMatrix<f64>,
    pub ayy: DMatrix<f64>,
    pub ay: DMatrix<f64>,
}

/// Boundary operator c_y(x)·∂y + c_x(x)·∂x on one row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxCoeffs {
    pub cy: Vec<f64>,
    pub cx: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffFields {
    pub lower: StripCoeffs,
    pub upper: StripCoeffs,
    /// B(f) on Γ₀ from below.
    pub flux_lower: FluxCoeffs,
    /// B(f,h) on Γ₀ from above.
    pub flux_upper: FluxCoeffs,
    /// B₁(f,h) on Γ₁.
    pub flux_top: FluxCoeffs,
}

struct Profile {
    v: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

fn profile(grid: &Grid, f: &TrigPoly) -> Profile {
    let nx = grid.nx();
    let f = f.resized(grid.n_modes());
    Profile {
        v: f.to_grid(nx),
        d1: f.derivative(1).to_grid(nx),
        d2: f.derivative(2).to_grid(nx),
    }
}

fn check_floor(values: impl Iterator<Item = f64>) -> Result<()> {
    let min = values.fold(f64::INFINITY, f64::min);
    if min < DENOMINATOR_FLOOR {
        Err(Error::DegenerateMapping {
            min_denominator: min,
        })
    } else {
        Ok(())
    }
}

pub fn lower_coeffs(grid: &Grid, p: &PhysParams, f: &TrigPoly) -> Result<(StripCoeffs, FluxCoeffs)> {
    let pf = profile(grid, f);
    check_floor(pf.v.iter().map(|v| 1.0 + v))?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let y = grid.y(Strip::Lower);
    let mut axy = DMatrix::zeros(nx, ny);
    let mut ayy = DMatrix::zeros(nx, ny);
    let mut ay = DMatrix::zeros(nx, ny);
    for i in 0..nx {
        let (fv, f1, f2) = (pf.v[i], pf.d1[i], pf.d2[i]);
        let w = 1.0 + fv;
        for (j, &yj) in y.iter().enumerate() {
            let s = 1.0 + yj;
            axy[(i, j)] = -2.0 * s * f1 / w;
            ayy[(i, j)] = (s * s * f1 * f1 + 1.0) / (w * w);
            ay[(i, j)] = -s * (w * f2 - 2.0 * f1 * f1) / (w * w);
        }
    }
    let scale = p.k / p.mu_minus;
    let flux = FluxCoeffs {
        cy: (0..nx)
            .map(|i| scale * (1.0 + pf.d1[i] * pf.d1[i]) / (1.0 + pf.v[i]))
            .collect(),
        cx: pf.d1.iter().map(|d| -scale * d).collect(),
    };
    Ok((
        StripCoeffs {
            strip: Strip::Lower,
            axy,
            ayy,
            ay,
        },
        flux,
    ))
}

/// Coefficients on Ω₊ together with the fluxes B(f,h) (on Γ₀) and B₁(f,h)
/// (on Γ₁).
pub fn upper_coeffs(
    grid: &Grid,
    p: &PhysParams,
    f: &TrigPoly,
    h: &TrigPoly,
) -> Result<(StripCoeffs, FluxCoeffs, FluxCoeffs)> {
    let pf = profile(grid, f);
    let ph = profile(grid, h);
    let (nx, ny) = (grid.nx(), grid.ny());
    let d: Vec<f64> = (0..nx).map(|i| 1.0 + ph.v[i] - pf.v[i]).collect();
    check_floor(d.iter().copied())?;
    let y = grid.y(Strip::Upper);
    let mut axy = DMatrix::zeros(nx, ny);
    let mut ayy = DMatrix::zeros(nx, ny);
    let mut ay = DMatrix::zeros(nx, ny);
    for i in 0..nx {
        let di = d[i];
        let dd = ph.d1[i] - pf.d1[i];
        for (j, &yj) in y.iter().enumerate() {
            let s = yj * ph.d1[i] + (1.0 - yj) * pf.d1[i];
            let s2 = yj * ph.d2[i] + (1.0 - yj) * pf.d2[i];
            axy[(i, j)] = -2.0 * s / di;
            ayy[(i, j)] = (s * s + 1.0) / (di * di);
            ay[(i, j)] = -(s2 / di - 2.0 * dd * s / (di * di));
        }
    }
    let scale = p.k / p.mu_plus;
    let bottom = FluxCoeffs {
        cy: (0..nx)
            .map(|i| scale * (1.0 + pf.d1[i] * pf.d1[i]) / d[i])
            .collect(),
        cx: pf.d1.iter().map(|v| -scale * v).collect(),
    };
    let top = FluxCoeffs {
        cy: (0..nx)
            .map(|i| -scale * (1.0 + ph.d1[i] * ph.d1[i]) / d[i])
            .collect(),
        cx: ph.d1.iter().map(|v| scale * v).collect(),
    };
    Ok((
        StripCoeffs {
            strip: Strip::Upper,
            axy,
            ayy,
            ay,
        },
        bottom,
        top,
    ))
}

/// All transformed-operator coefficients for the interface pair (f, h).
pub fn assemble_coeffs(grid: &Grid, p: &PhysParams, f: &TrigPoly, h: &TrigPoly) -> Result<CoeffFields> {
    let (lower, flux_lower) = lower_coeffs(grid, p, f)?;
    let (upper, flux_upper, flux_top) = upper_coeffs(grid, p, f, h)?;
    Ok(CoeffFields {
        lower,
        upper,
        flux_lower,
        flux_upper,
        flux_top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::grid::Discretization;

    fn params() -> PhysParams {
        PhysParams::new(1.5, 1.0, 2.0, 3.0, 1.0, 2.0, 0.0, 0.0)
    }

    #[test]
    fn flat_interfaces_give_the_laplacian() {
        let g = Grid::new(Discretization::new(4, 6));
        let z = TrigPoly::zeros(4);
        let c = assemble_coeffs(&g, &params(), &z, &z).unwrap();
        for s in [&c.lower, &c.upper] {
            assert!(s.axy.iter().all(|v| *v == 0.0));
            assert!(s.ay.iter().all(|v| *v == 0.0));
            assert!(s.ayy.iter().all(|v| *v == 1.0));
        }
        assert!(c.flux_lower.cy.iter().all(|v| (*v - 0.5).abs() < 1e-15));
        assert!(c.flux_upper.cy.iter().all(|v| (*v - 0.75).abs() < 1e-15));
        assert!(c.flux_top.cy.iter().all(|v| (*v + 0.75).abs() < 1e-15));
        assert!(c.flux_lower.cx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lower_coefficients_at_crest() {
        let g = Grid::new(Discretization::new(6, 8));
        let f = TrigPoly::cosine(6, 1, 0.1);
        let (c, _) = lower_coeffs(&g, &params(), &f).unwrap();
        // x = 0 is column 0; y = 0 is row 0 and y = -1 the last row
        assert!(c.axy[(0, 0)].abs() < 1e-15);
        assert!((c.ayy[(0, 7)] - 1.0 / 1.21).abs() < 1e-14);
        // a_y at (0, 0): -(1)(1.1·(-0.1) - 0)/1.21
        assert!((c.ay[(0, 0)] - 0.11 / 1.21).abs() < 1e-14);
    }

    #[test]
    fn floor_rejects_degenerate_mapping() {
        let g = Grid::new(Discretization::new(2, 4));
        let f = TrigPoly::constant(2, -1.0);
        assert!(matches!(
            lower_coeffs(&g, &params(), &f),
            Err(Error::DegenerateMapping { .. })
        ));
        let h = TrigPoly::constant(2, -0.5);
        let f = TrigPoly::constant(2, 0.5);
        assert!(upper_coeffs(&g, &params(), &f, &h).is_err());
    }
}
