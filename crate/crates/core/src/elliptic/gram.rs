use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Outcome of the preconditioned iterative solve.
#[derive(Clone, Debug, PartialEq)]
pub struct IterativeSolve {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES for `apply(x) = rhs` with the scalar left preconditioner
/// `precond`·I.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Result<Vec<f64>>,
    rhs: &[f64],
    precond: f64,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<IterativeSolve> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let b: Vec<f64> = rhs.iter().map(|v| precond * v).collect();
    let b_norm = norm(&b).max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    loop {
        let ax = apply(&x)?;
        let r: Vec<f64> = (0..n).map(|i| b[i] - precond * ax[i]).collect();
        let beta = norm(&r);
        if beta <= tol * b_norm {
            return Ok(IterativeSolve {
                solution: x,
                iterations,
                residual: beta / b_norm,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: beta / b_norm,
            });
        }
        let m = restart.min(n).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|t| t / beta).collect()];
        let mut hess = DMatrix::<f64>::zeros(m + 1, m);
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            let mut w: Vec<f64> = apply(&v[k])?.iter().map(|t| precond * t).collect();
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(&w, vi);
                hess[(i, k)] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let wn = norm(&w);
            hess[(k + 1, k)] = wn;
            for i in 0..k {
                let t = cs[i] * hess[(i, k)] + sn[i] * hess[(i + 1, k)];
                hess[(i + 1, k)] = -sn[i] * hess[(i, k)] + cs[i] * hess[(i + 1, k)];
                hess[(i, k)] = t;
            }
            let denom = hess[(k, k)].hypot(hess[(k + 1, k)]);
            cs[k] = hess[(k, k)] / denom;
            sn[k] = hess[(k + 1, k)] / denom;
            hess[(k, k)] = denom;
            hess[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() <= tol * b_norm || wn == 0.0 || iterations >= max_iter {
                break;
            }
            v.push(w.iter().map(|t| t / wn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| hess[(i, j)] * y[j]).sum();
            y[i] = (g[i] - s) / hess[(i, i)];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vi;
            }
        }
    }
}
