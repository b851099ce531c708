//! Truncated Fourier series of real 2π-periodic functions.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Uniform grid x_j = 2πj/n on [0, 2π).
pub fn grid_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Smallest odd grid size that dealiases quadratic-and-higher products of
/// degree-`n` polynomials (at least 3n+1 points).
pub fn dealiased_size(n: usize) -> usize {
    let m = 3 * n + 1;
    if m.is_multiple_of(2) {
        m + 1
    } else {
        m
    }
}

/// Real trigonometric polynomial of degree `n`,
/// f(x) = Σ_{|m|≤n} c_m e^{imx} with c_{-m} = conj(c_m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zeros(n);
        p.coeffs[n] = Complex64::new(c, 0.0);
        p
    }

    /// `amp·cos(m x)` in a degree-`n` container.
    pub fn cosine(n: usize, m: usize, amp: f64) -> Self {
        let mut p = Self::zeros(n);
        if m == 0 {
            p.coeffs[n] = Complex64::new(amp, 0.0);
        } else {
            p.set(m, Complex64::new(0.5 * amp, 0.0));
        }
        p
    }

    /// `amp·sin(m x)`.
    pub fn sine(n: usize, m: usize, amp: f64) -> Self {
        let mut p = Self::zeros(n);
        if m > 0 {
            p.set(m, Complex64::new(0.0, -0.5 * amp));
        }
        p
    }

    /// Builds a polynomial from real cosine/sine amplitudes,
    /// f = a_0 + Σ a_m cos(mx) + Σ b_m sin(mx).
    pub fn from_real(n: usize, cos: &[f64], sin: &[f64]) -> Self {
        let mut p = Self::zeros(n);
        for (m, &a) in cos.iter().enumerate().take(n + 1) {
            p = p + Self::cosine(n, m, a);
        }
        for (m, &b) in sin.iter().enumerate().take(n + 1) {
            p = p + Self::sine(n, m, b);
        }
        p
    }

    /// Takes coefficients for wavenumbers -n..=n (length 2n+1) and enforces
    /// Hermitian symmetry by averaging each ±m pair.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient vector must have odd length");
        let mut p = Self { coeffs };
        p.symmetrize();
        p
    }

    /// Interpolates grid values at x_j = 2πj/len and truncates to degree `n`.
    pub fn from_grid(values: &[f64], n: usize) -> Self {
        let len = values.len();
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut buf, false);
        let scale = 1.0 / len as f64;
        let mut p = Self::zeros(n);
        let half = (len - 1) / 2;
        for m in 0..=n.min(half) {
            let c = buf[m] * scale;
            if m == 0 {
                p.coeffs[n] = Complex64::new(c.re, 0.0);
            } else {
                // average with the mirrored bin so the result stays Hermitian
                let cm = buf[len - m].conj() * scale;
                p.set(m, 0.5 * (c + cm));
            }
        }
        p
    }

    pub fn degree(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// Coefficient of e^{imx}; zero outside the stored range.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.degree() as i64;
        if m.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + n) as usize]
        }
    }

    /// Sets the coefficient at `m > 0` and its conjugate partner at `-m`.
    pub fn set(&mut self, m: usize, c: Complex64) {
        let n = self.degree();
        assert!(m <= n);
        if m == 0 {
            self.coeffs[n] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[n + m] = c;
            self.coeffs[n - m] = c.conj();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mean value (the m = 0 coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[self.degree()].re
    }

    /// ∫_0^{2π} f dx.
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.mean()
    }

    /// Cosine amplitude a_m of f = Σ a_m cos(mx) + b_m sin(mx).
    pub fn cos_amp(&self, m: usize) -> f64 {
        if m == 0 {
            self.mean()
        } else {
            2.0 * self.coeff(m as i64).re
        }
    }

    pub fn sin_amp(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            -2.0 * self.coeff(m as i64).im
        }
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.degree() as i64;
        let mut d = self.coeff(0).im.abs();
        for m in 1..=n {
            d = d.max((self.coeff(m) - self.coeff(-m).conj()).norm());
        }
        d
    }

    fn symmetrize(&mut self) {
        let n = self.degree();
        self.coeffs[n].im = 0.0;
        for m in 1..=n {
            let c = 0.5 * (self.coeffs[n + m] + self.coeffs[n - m].conj());
            self.coeffs[n + m] = c;
            self.coeffs[n - m] = c.conj();
        }
    }

    /// Zero-pads or truncates to degree `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut p = Self::zeros(n);
        for m in 0..=n.min(self.degree()) {
            p.set(m, self.coeff(m as i64));
        }
        p
    }

    /// k-th derivative, computed by multiplying with (im)^k.
    pub fn derivative(&self, k: u32) -> Self {
        let n = self.degree() as i64;
        let mut p = self.clone();
        for m in -n..=n {
            let factor = Complex64::new(0.0, m as f64).powu(k);
            p.coeffs[(m + n) as usize] *= factor;
        }
        p
    }

    /// Values on the uniform grid of `len` points; `len` must be at least 2n+1.
    pub fn to_grid(&self, len: usize) -> Vec<f64> {
        let n = self.degree();
        assert!(len > 2 * n, "grid of {len} points cannot resolve degree {n}");
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for m in -(n as i64)..=(n as i64) {
            buf[m.rem_euclid(len as i64) as usize] = self.coeff(m);
        }
        fft_in_place(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Pointwise evaluation by direct summation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        let mut s = self.mean();
        for m in 1..=n {
            let c = self.coeff(m as i64);
            let arg = m as f64 * x;
            s += 2.0 * (c.re * arg.cos() - c.im * arg.sin());
        }
        s
    }

    pub fn max_abs(&self, len: usize) -> f64 {
        self.to_grid(len).iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest coefficient magnitude over all wavenumbers.
    pub fn coeff_norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Sine content of the polynomial; zero for even functions.
    pub fn odd_part_norm(&self) -> f64 {
        (1..=self.degree()).fold(0.0, |a, m| a.max(self.coeff(m as i64).im.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.degree().max(other.degree());
        let mut p = Self::zeros(n);
        for m in -(n as i64)..=(n as i64) {
            p.coeffs[(m + n as i64) as usize] = op(self.coeff(m), other.coeff(m));
        }
        p
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, s: f64) -> TrigPoly {
        self.scaled(s)
    }
}

/// Curvature f''/(1+f'^2)^{3/2} sampled on a uniform grid of `len` points.
pub fn curvature_on_grid(f: &TrigPoly, len: usize) -> Vec<f64> {
    let d1 = f.derivative(1).to_grid(len);
    let d2 = f.derivative(2).to_grid(len);
    d1.iter()
        .zip(&d2)
        .map(|(&fp, &fpp)| fpp / (1.0 + fp * fp).powf(1.5))
        .collect()
}

/// Curvature projected back to degree `deg(f)`, evaluated on a zero-padded
/// grid of at least 3N+1 points.
pub fn curvature(f: &TrigPoly) -> TrigPoly {
    let n = f.degree();
    let len = dealiased_size(n);
    TrigPoly::from_grid(&curvature_on_grid(f, len), n)
}
