use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::fourier::{dealiased_size, grid_points, TrigPoly};
use crate::params::PhysParams;

/// Even, mean-zero profiles built from cos(l·k·x), k = 1..=K.
///
/// Restricting to multiples of l keeps the continuation of the l-th branch
/// away from the lower bifurcation points γ̄_{k}, k < l.
#[derive(Clone, Debug)]
pub struct CosineBasis {
    pub l: usize,
    pub n_coeffs: usize,
    pub len: usize,
    x: Vec<f64>,
}

/// f, f', f'' on the collocation grid.
#[derive(Clone, Debug)]
pub struct Profile {
    pub f: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl CosineBasis {
    pub fn new(l: usize, n_coeffs: usize) -> Self {
        assert!(l >= 1 && n_coeffs >= 1);
        let len = dealiased_size(l * n_coeffs);
        Self {
            l,
            n_coeffs,
            len,
            x: grid_points(len),
        }
    }

    pub fn degree(&self) -> usize {
        self.l * self.n_coeffs
    }

    pub fn wavenumber(&self, k: usize) -> usize {
        self.l * (k + 1)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Polynomial with cosine amplitudes `a[k]` at wavenumber l(k+1).
    pub fn poly(&self, a: &[f64]) -> TrigPoly {
        let mut cos = vec![0.0; self.degree() + 1];
        for (k, v) in a.iter().enumerate() {
            cos[self.wavenumber(k)] = *v;
        }
        TrigPoly::from_real(self.degree(), &cos, &vec![0.0; self.degree() + 1])
    }

    pub fn profile(&self, a: &[f64]) -> Profile {
        let p = self.poly(a);
        Profile {
            f: p.to_grid(self.len),
            d1: p.derivative(1).to_grid(self.len),
            d2: p.derivative(2).to_grid(self.len),
        }
    }

    /// Cosine amplitudes of grid values on the retained wavenumbers.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        let p = TrigPoly::from_grid(values, self.degree());
        (0..self.n_coeffs).map(|k| p.cos_amp(self.wavenumber(k))).collect()
    }
}

fn curvature(pr: &Profile) -> Vec<f64> {
    pr.d1
        .iter()
        .zip(&pr.d2)
        .map(|(a, b)| b / (1.0 + a * a).powf(1.5))
        .collect()
}

/// γ_w κ(f) + g(ρ₊-ρ₋) f on the grid.
pub fn residual_grid(basis: &CosineBasis, gamma_w: f64, a: &[f64], p: &PhysParams) -> Vec<f64> {
    let pr = basis.profile(a);
    let jump = p.buoyancy_jump();
    curvature(&pr)
        .iter()
        .zip(&pr.f)
        .map(|(k, f)| gamma_w * k + jump * f)
        .collect()
}

/// Laplace-Young residual projected onto the retained cosine modes.
pub fn laplace_young_residual(basis: &CosineBasis, gamma_w: f64, a: &[f64], p: &PhysParams) -> Vec<f64> {
    basis.project(&residual_grid(basis, gamma_w, a, p))
}

/// Residual, its Jacobian in the amplitudes and its derivative in γ_w.
pub fn residual_and_jacobian(
    basis: &CosineBasis,
    gamma_w: f64,
    a: &[f64],
    p: &PhysParams,
) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let pr = basis.profile(a);
    let kappa = curvature(&pr);
    let jump = p.buoyancy_jump();
    let res: Vec<f64> = kappa.iter().zip(&pr.f).map(|(k, f)| gamma_w * k + jump * f).collect();
    let k = basis.n_coeffs;
    let mut jac = DMatrix::zeros(k, k);
    let w1: Vec<f64> = pr.d1.iter().map(|d| (1.0 + d * d).powf(-1.5)).collect();
    let w2: Vec<f64> = (0..basis.len)
        .map(|i| -3.0 * pr.d2[i] * pr.d1[i] * (1.0 + pr.d1[i] * pr.d1[i]).powf(-2.5))
        .collect();
    for c in 0..k {
        let n = basis.wavenumber(c) as f64;
        let col: Vec<f64> = basis
            .x()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let (s, co) = (n * x).sin_cos();
                gamma_w * (-n * n * co * w1[i] - n * s * w2[i]) + jump * co
            })
            .collect();
        for (r, v) in basis.project(&col).into_iter().enumerate() {
            jac[(r, c)] = v;
        }
    }
    (
        DVector::from_vec(basis.project(&res)),
        jac,
        DVector::from_vec(basis.project(&kappa)),
    )
}

/// E = (g(ρ₊-ρ₋)/(2γ_w)) f² - (1+f'²)^{-1/2}; constant along solutions.
pub fn first_integral(basis: &CosineBasis, gamma_w: f64, a: &[f64], p: &PhysParams) -> Vec<f64> {
    let pr = basis.profile(a);
    let c = p.buoyancy_jump() / (2.0 * gamma_w);
    pr.f
        .iter()
        .zip(&pr.d1)
        .map(|(f, d)| c * f * f - 1.0 / (1.0 + d * d).sqrt())
        .collect()
}

/// Euler beta function via the gamma function.
pub fn beta(a: f64, b: f64) -> f64 {
    (statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b)
        - statrs::function::gamma::ln_gamma(a + b))
    .exp()
}

/// Upper bound 2π² g(ρ₊-ρ₋) / (B(3/4, 1/2)² l²) for γ along the l-th branch.
pub fn asymptote_bound(p: &PhysParams, l: usize) -> f64 {
    let b = beta(0.75, 0.5);
    2.0 * PI * PI * p.buoyancy_jump() / (b * b * (l * l) as f64)
}
