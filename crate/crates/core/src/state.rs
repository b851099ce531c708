use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::TrigPoly;

/// Sup-norm bound of the admissible set, less a strict safety margin.
pub const ADMISSIBLE_LIMIT: f64 = 0.5 - 1e-9;

/// Truncated Fourier representation of the interface pair (f, h) at one time.
///
/// `f` parametrises the fluid-fluid interface y = f(x), `h` the fluid-air
/// interface y = 1 + h(x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceState {
    pub n_modes: usize,
    pub f: TrigPoly,
    pub h: TrigPoly,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub max_f: f64,
    pub max_h: f64,
}

impl InterfaceState {
    pub fn new(f: TrigPoly, h: TrigPoly, time: f64) -> Self {
        let n = f.degree().max(h.degree()).max(1);
        Self {
            n_modes: n,
            f: f.resized(n),
            h: h.resized(n),
            time,
        }
    }

    pub fn flat(n_modes: usize) -> Self {
        Self::new(TrigPoly::zeros(n_modes), TrigPoly::zeros(n_modes), 0.0)
    }

    /// Volume of the upper fluid relative to the flat reference, ∫(f - h)dx.
    pub fn volume_integral(&self) -> f64 {
        self.f.integral() - self.h.integral()
    }

    /// Sup-norm test for |f|, |h| < 1/2 on a grid of `grid_size` points.
    ///
    /// `grid_size` below 2N+1 is raised to 2N+1 so the polynomial is resolved.
    pub fn admissibility(&self, grid_size: usize) -> AdmissibilityReport {
        let len = grid_size.max(2 * self.n_modes + 1);
        let max_f = self.f.max_abs(len);
        let max_h = self.h.max_abs(len);
        AdmissibilityReport {
            admissible: max_f < ADMISSIBLE_LIMIT && max_h < ADMISSIBLE_LIMIT,
            max_f,
            max_h,
        }
    }

    pub fn ensure_admissible(&self, grid_size: usize) -> Result<()> {
        let r = self.admissibility(grid_size);
        if r.admissible {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                max_f: r.max_f,
                max_h: r.max_h,
            })
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        let len = 4 * self.n_modes + 1;
        self.f.max_abs(len).max(self.h.max_abs(len))
    }

    pub fn is_finite(&self) -> bool {
        self.f
            .coeffs()
            .iter()
            .chain(self.h.coeffs())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Potential prescribed on the bottom of the strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryData {
    /// b(x, t) = c.
    Constant(f64),
    /// Fourier coefficients of b(., t_i) at increasing sample times,
    /// interpolated linearly in time and held constant outside the range.
    Sampled {
        times: Vec<f64>,
        samples: Vec<TrigPoly>,
    },
}

impl BoundaryData {
    pub fn sampled(times: Vec<f64>, samples: Vec<TrigPoly>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::InvalidInput(
                "boundary samples and times must be nonempty and of equal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "boundary sample times must increase strictly".into(),
            ));
        }
        if samples.iter().any(|s| s.hermitian_defect() > 1e-12) {
            return Err(Error::InvalidInput(
                "boundary samples must be real-valued (Hermitian)".into(),
            ));
        }
        Ok(BoundaryData::Sampled { times, samples })
    }

    pub fn is_x_dependent(&self) -> bool {
        match self {
            BoundaryData::Constant(_) => false,
            BoundaryData::Sampled { samples, .. } => samples
                .iter()
                .any(|s| (1..=s.degree()).any(|m| s.coeff(m as i64).norm() > 0.0)),
        }
    }

    /// b(., t) as a polynomial of degree `n`.
    pub fn at(&self, t: f64, n: usize) -> TrigPoly {
        match self {
            BoundaryData::Constant(c) => TrigPoly::constant(n, *c),
            BoundaryData::Sampled { times, samples } => {
                let (i, w) = bracket(times, t);
                let lo = samples[i].resized(n);
                if w == 0.0 {
                    return lo;
                }
                let hi = samples[i + 1].resized(n);
                let mut out = TrigPoly::zeros(n);
                for m in 0..=n {
                    let c: Complex64 =
                        (1.0 - w) * lo.coeff(m as i64) + w * hi.coeff(m as i64);
                    out.set(m, c);
                }
                out
            }
        }
    }

    /// Spatial mean of b(., t).
    pub fn mean_at(&self, t: f64) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::Sampled { .. } => self.at(t, 0).mean(),
        }
    }
}

/// Index of the left sample and the interpolation weight toward the next one.
fn bracket(times: &[f64], t: f64) -> (usize, f64) {
    if t <= times[0] || times.len() == 1 {
        return (0, 0.0);
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return (last, 0.0);
    }
    let i = times.partition_point(|&s| s <= t) - 1;
    (i, (t - times[i]) / (times[i + 1] - times[i]))
}
