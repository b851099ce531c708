use num_complex::Complex64;

use crate::params::PhysParams;
use crate::state::InterfaceState;
use crate::symbols::{symbol_equilibrium, symbol_tilde, SymbolQuad};

/// exp(tM) for a real 2×2 matrix, written through its eigenvalues so that
/// strongly damped modes underflow to zero instead of overflowing.
pub fn expm2(m: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let tau = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let delta2 = half * half + m[0][1] * m[1][0];
    // exp(tM) = c0·I + c1·(M - τI)
    let (c0, c1) = if delta2.abs() * t * t < 1e-6 {
        let e = (tau * t).exp();
        let z = delta2 * t * t;
        (e * (1.0 + z / 2.0 + z * z / 24.0), e * t * (1.0 + z / 6.0 + z * z / 120.0))
    } else if delta2 > 0.0 {
        let d = delta2.sqrt();
        let ep = ((tau + d) * t).exp();
        let em = ((tau - d) * t).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / d)
    } else {
        let w = (-delta2).sqrt();
        let e = (tau * t).exp();
        (e * (w * t).cos(), e * (w * t).sin() / w)
    };
    [
        [c0 + c1 * (m[0][0] - tau), c1 * m[0][1]],
        [c1 * m[1][0], c0 + c1 * (m[1][1] - tau)],
    ]
}

fn apply(a: &[[f64; 2]; 2], u: (Complex64, Complex64)) -> (Complex64, Complex64) {
    (a[0][0] * u.0 + a[0][1] * u.1, a[1][0] * u.0 + a[1][1] * u.1)
}

/// Mode-0 propagation in the tilde variables: f̃₀ is frozen and
/// f₀' = λ̃₁^f(0) f₀ + λ̃₁^{f̃}(0) f̃₀.
fn step_mean(q0: &SymbolQuad, f0: f64, ft0: f64, dt: f64) -> f64 {
    let a = q0.lam_f1;
    let e = (a * dt).exp();
    e * f0 + q0.lam_h1 * (a * dt).exp_m1() / a * ft0
}

/// Advances the linearised system around the flat state (b ≡ gρ₊) exactly by
/// `dt`, one 2×2 matrix exponential per wavenumber.
pub fn step_linear(state: &InterfaceState, dt: f64, p: &PhysParams) -> InterfaceState {
    let n = state.n_modes;
    let mut out = state.clone();
    let q0 = symbol_tilde(0, p);
    let f0 = state.f.mean();
    let ft0 = f0 - state.h.mean();
    let f0n = step_mean(&q0, f0, ft0, dt);
    out.f.set(0, Complex64::new(f0n, 0.0));
    out.h.set(0, Complex64::new(f0n - ft0, 0.0));
    for m in 1..=n {
        let e = expm2(symbol_equilibrium(m as i64, p).matrix(), dt);
        let (f, h) = apply(&e, (state.f.coeff(m as i64), state.h.coeff(m as i64)));
        out.f.set(m, f);
        out.h.set(m, h);
    }
    out.time += dt;
    out
}

/// The same propagation carried out on (f, f̃ = f - h) with the tilde
/// symbols; used to cross-check [`step_linear`].
pub fn step_linear_tilde(state: &InterfaceState, dt: f64, p: &PhysParams) -> InterfaceState {
    let n = state.n_modes;
    let mut out = state.clone();
    let q0 = symbol_tilde(0, p);
    let f0 = state.f.mean();
    let ft0 = f0 - state.h.mean();
    let f0n = step_mean(&q0, f0, ft0, dt);
    out.f.set(0, Complex64::new(f0n, 0.0));
    out.h.set(0, Complex64::new(f0n - ft0, 0.0));
    for m in 1..=n {
        let e = expm2(symbol_tilde(m as i64, p).matrix(), dt);
        let f = state.f.coeff(m as i64);
        let ft = f - state.h.coeff(m as i64);
        let (fnew, ftnew) = apply(&e, (f, ft));
        out.f.set(m, fnew);
        out.h.set(m, fnew - ftnew);
    }
    out.time += dt;
    out
}
