use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fourier::grid_points;

/// Resolution of the strip discretisation: degree `n_modes` in x
/// (2N+1 collocation points) and `n_y` Chebyshev-Lobatto points in y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    pub n_modes: usize,
    pub n_y: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            n_modes: 32,
            n_y: 24,
        }
    }
}

impl Discretization {
    pub fn new(n_modes: usize, n_y: usize) -> Self {
        Self { n_modes, n_y }
    }

    pub fn nx(&self) -> usize {
        2 * self.n_modes + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strip {
    /// Ω₋ = S¹ × (-1, 0); row 0 is Γ₀, the last row Γ₋₁.
    Lower,
    /// Ω₊ = S¹ × (0, 1); row 0 is Γ₁, the last row Γ₀.
    Upper,
}

/// Collocation nodes and differentiation matrices shared by both strips.
#[derive(Clone, Debug)]
pub struct Grid {
    pub disc: Discretization,
    pub x: Vec<f64>,
    /// Chebyshev-Lobatto nodes cos(πj/(M-1)) on [-1, 1], descending.
    pub xi: Vec<f64>,
    pub dx: DMatrix<f64>,
    pub dxx: DMatrix<f64>,
    /// d/dy on a strip of unit height.
    pub dy: DMatrix<f64>,
    pub dyy: DMatrix<f64>,
}

impl Grid {
    pub fn new(disc: Discretization) -> Self {
        assert!(disc.n_y >= 3, "need at least three Chebyshev points");
        let nx = disc.nx();
        let dx = fourier_diff(nx);
        let dxx = &dx * &dx;
        let (xi, dxi) = chebyshev(disc.n_y);
        let dy = dxi * 2.0;
        let dyy = &dy * &dy;
        Self {
            disc,
            x: grid_points(nx),
            xi,
            dx,
            dxx,
            dy,
            dyy,
        }
    }

    pub fn nx(&self) -> usize {
        self.disc.nx()
    }

    pub fn ny(&self) -> usize {
        self.disc.n_y
    }

    pub fn n_modes(&self) -> usize {
        self.disc.n_modes
    }

    /// Physical y coordinates of the rows of `strip`.
    pub fn y(&self, strip: Strip) -> Vec<f64> {
        match strip {
            Strip::Lower => self.xi.iter().map(|s| 0.5 * (s - 1.0)).collect(),
            Strip::Upper => self.xi.iter().map(|s| 0.5 * (s + 1.0)).collect(),
        }
    }
}

/// Periodic spectral differentiation matrix for an odd number of points.
pub fn fourier_diff(n: usize) -> DMatrix<f64> {
    assert!(n % 2 == 1, "Fourier collocation grid must be odd");
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let k = i as i64 - j as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * k as f64 * h).sin()
        }
    })
}

/// Chebyshev-Lobatto nodes and first-derivative matrix on [-1, 1].
pub fn chebyshev(m: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = m - 1;
    let x: Vec<f64> = (0..m)
        .map(|j| (PI * j as f64 / n as f64).cos())
        .collect();
    let c = |j: usize| {
        let e = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            e
        } else {
            -e
        }
    };
    let mut d = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            0.0
        } else {
            c(i) / c(j) / (x[i] - x[j])
        }
    });
    for i in 0..m {
        let s: f64 = (0..m).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (x, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_matrix_differentiates_trig_polynomials() {
        let n = 11;
        let d = fourier_diff(n);
        let x = grid_points(n);
        let v: Vec<f64> = x.iter().map(|t| (3.0 * t).sin() + (5.0 * t).cos()).collect();
        for i in 0..n {
            let s: f64 = (0..n).map(|j| d[(i, j)] * v[j]).sum();
            let exact = 3.0 * (3.0 * x[i]).cos() - 5.0 * (5.0 * x[i]).sin();
            assert!((s - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_matrix_is_exact_for_polynomials() {
        let (x, d) = chebyshev(9);
        let v: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t * t).collect();
        for i in 0..9 {
            let s: f64 = (0..9).map(|j| d[(i, j)] * v[j]).sum();
            assert!((s - (5.0 * x[i].powi(4) - 4.0 * x[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn strip_rows_hit_boundaries() {
        let g = Grid::new(Discretization::new(4, 8));
        let lo = g.y(Strip::Lower);
        let up = g.y(Strip::Upper);
        assert_eq!((lo[0], lo[7]), (0.0, -1.0));
        assert_eq!((up[0], up[7]), (1.0, 0.0));
    }
}
