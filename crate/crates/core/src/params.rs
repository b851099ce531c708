use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the two-fluid/air configuration.
///
/// The `plus` fluid sits on top (between the fluid-fluid interface and air),
/// the `minus` fluid at the bottom of the strip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// Permeability of the porous medium.
    pub k: f64,
    /// Gravitational acceleration.
    pub g: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// Surface tension of the fluid-fluid interface.
    pub gamma_w: f64,
    /// Surface tension of the fluid-air interface.
    pub gamma_d: f64,
}

impl PhysParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: f64,
        g: f64,
        mu_plus: f64,
        mu_minus: f64,
        rho_plus: f64,
        rho_minus: f64,
        gamma_w: f64,
        gamma_d: f64,
    ) -> Self {
        Self {
            k,
            g,
            mu_plus,
            mu_minus,
            rho_plus,
            rho_minus,
            gamma_w,
            gamma_d,
        }
    }

    /// Returns the parameters unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.mu_plus) || !positive(self.mu_minus) {
            return Err(Error::InvalidParams("nonpositive viscosity".into()));
        }
        if !positive(self.rho_plus) || !positive(self.rho_minus) {
            return Err(Error::InvalidParams("nonpositive density".into()));
        }
        if !positive(self.k) {
            return Err(Error::InvalidParams("nonpositive permeability".into()));
        }
        if !positive(self.g) {
            return Err(Error::InvalidParams("nonpositive gravity".into()));
        }
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.gamma_w) || !nonneg(self.gamma_d) {
            return Err(Error::InvalidParams("negative surface tension".into()));
        }
        Ok(self)
    }

    /// Viscosity contrast (mu+ - mu-)/(mu+ + mu-), always in (-1, 1).
    pub fn atwood(&self) -> f64 {
        (self.mu_plus - self.mu_minus) / (self.mu_plus + self.mu_minus)
    }

    pub fn mu_sum(&self) -> f64 {
        self.mu_plus + self.mu_minus
    }

    /// Boundary potential that keeps the flat state at rest.
    pub fn equilibrium_potential(&self) -> f64 {
        self.g * self.rho_plus
    }

    /// g(rho+ - rho-): positive when the denser fluid lies above.
    pub fn buoyancy_jump(&self) -> f64 {
        self.g * (self.rho_plus - self.rho_minus)
    }

    pub fn with_gamma_w(mut self, gamma_w: f64) -> Self {
        self.gamma_w = gamma_w;
        self
    }

    /// Sets a field by name; used by configuration overrides.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "k" => &mut self.k,
            "g" => &mut self.g,
            "mu_plus" => &mut self.mu_plus,
            "mu_minus" => &mut self.mu_minus,
            "rho_plus" => &mut self.rho_plus,
            "rho_minus" => &mut self.rho_minus,
            "gamma_w" => &mut self.gamma_w,
            "gamma_d" => &mut self.gamma_d,
            _ => return Err(Error::InvalidInput(format!("unknown parameter `{key}`"))),
        };
        *slot = value;
        Ok(())
    }
}
