//! TOML run configuration with `section.key=value` overrides.
//!
//! ```toml
//! [params]
//! k = 1.0
//! g = 1.0
//! mu_plus = 1.0
//! mu_minus = 1.0
//! rho_plus = 1.0
//! rho_minus = 2.0
//! gamma_w = 0.0
//! gamma_d = 0.0
//!
//! [discretization]
//! n_modes = 32
//! n_y = 24
//! t_end = 5.0
//!
//! [boundary]
//! mode = "constant"
//! value = 1.0
//!
//! [initial]
//! f_cos = [0.02, 0.05]
//! h_cos = [0.02]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elliptic::Discretization;
use crate::error::{Error, Result};
use crate::evolution::{default_dt, EvolutionConfig, Integrator};
use crate::fourier::TrigPoly;
use crate::params::PhysParams;
use crate::state::{BoundaryData, InterfaceState};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    k: f64,
    g: f64,
    mu_plus: f64,
    mu_minus: f64,
    rho_plus: f64,
    rho_minus: f64,
    #[serde(default)]
    gamma_w: f64,
    #[serde(default)]
    gamma_d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    /// Time step; chosen from the stiffest retained mode when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
}

fn default_n_modes() -> usize {
    32
}
fn default_n_y() -> usize {
    24
}
fn default_t_end() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    1
}
fn default_integrator() -> Integrator {
    Integrator::Imex
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self {
            n_modes: default_n_modes(),
            n_y: default_n_y(),
            dt: None,
            t_end: default_t_end(),
            record_every: default_record_every(),
            integrator: default_integrator(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BoundaryMode {
    Constant,
    XDependent,
}

fn default_mode() -> BoundaryMode {
    BoundaryMode::Constant
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Interpolation {
    Linear,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    t: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    #[serde(default = "default_mode")]
    mode: BoundaryMode,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    samples: Vec<RawSample>,
    #[serde(default)]
    #[allow(dead_code)]
    interpolation: Option<Interpolation>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    f_cos: Vec<f64>,
    #[serde(default)]
    f_sin: Vec<f64>,
    #[serde(default)]
    h_cos: Vec<f64>,
    #[serde(default)]
    h_sin: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: RawParams,
    #[serde(default)]
    discretization: DiscretizationSection,
    #[serde(default)]
    boundary: Option<RawBoundary>,
    #[serde(default)]
    initial: RawInitial,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub params: PhysParams,
    pub discretization: DiscretizationSection,
    pub boundary: BoundaryData,
    pub initial: InterfaceState,
}

/// `f(x) = Σ cos[m] cos(mx) + sin[m] sin(mx)`; `cos[0]` is the mean.
fn series(n: usize, cos: &[f64], sin: &[f64], what: &str) -> Result<TrigPoly> {
    if cos.len() > n + 1 || sin.len() > n + 1 {
        return Err(Error::InvalidInput(format!(
            "{what} has more coefficients than n_modes = {n} allows"
        )));
    }
    if sin.first().is_some_and(|s| *s != 0.0) {
        return Err(Error::InvalidInput(format!("{what}: sin[0] must be 0")));
    }
    Ok(TrigPoly::from_real(n, cos, sin))
}

/// Splits `key=value`, accepting `section.key` or a bare parameter name.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let (section, field) = key.split_once('.').unwrap_or(("params", key));
    if section.is_empty() || field.is_empty() {
        return Err(Error::InvalidInput(format!("bad override key `{key}`")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(Error::InvalidInput(format!("`{section}` is not a section"))),
    }
}

impl Config {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidInput(format!("config: {}", e.message())))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let r = raw.params;
        let params = PhysParams::new(
            r.k,
            r.g,
            r.mu_plus,
            r.mu_minus,
            r.rho_plus,
            r.rho_minus,
            r.gamma_w,
            r.gamma_d,
        )
        .validate()?;
        let d = raw.discretization;
        if d.n_modes == 0 || d.n_y < 3 {
            return Err(Error::InvalidInput("need n_modes ≥ 1 and n_y ≥ 3".into()));
        }
        let n = d.n_modes;
        let boundary = match raw.boundary {
            None => BoundaryData::Constant(params.equilibrium_potential()),
            Some(b) => match b.mode {
                BoundaryMode::Constant => {
                    if !b.samples.is_empty() {
                        return Err(Error::InvalidInput("constant boundary takes `value`, not `samples`".into()));
                    }
                    BoundaryData::Constant(b.value.unwrap_or(params.equilibrium_potential()))
                }
                BoundaryMode::XDependent => {
                    if b.value.is_some() {
                        return Err(Error::InvalidInput("x-dependent boundary takes `samples`, not `value`".into()));
                    }
                    let times = b.samples.iter().map(|s| s.t).collect();
                    let polys = b
                        .samples
                        .iter()
                        .map(|s| series(n, &s.cos, &s.sin, "boundary sample"))
                        .collect::<Result<Vec<_>>>()?;
                    BoundaryData::sampled(times, polys)?
                }
            },
        };
        let i = raw.initial;
        let initial = InterfaceState::new(
            series(n, &i.f_cos, &i.f_sin, "initial f")?,
            series(n, &i.h_cos, &i.h_sin, "initial h")?,
            0.0,
        );
        Ok(Self {
            params,
            discretization: d,
            boundary,
            initial,
        })
    }

    pub fn disc(&self) -> Discretization {
        Discretization::new(self.discretization.n_modes, self.discretization.n_y)
    }

    pub fn evolution(&self) -> Result<EvolutionConfig> {
        let d = &self.discretization;
        let cfg = EvolutionConfig {
            dt: d.dt.unwrap_or_else(|| default_dt(&self.params, d.n_modes)),
            t_end: d.t_end,
            integrator: d.integrator,
            record_every: d.record_every,
            b: self.boundary.clone(),
            disc: self.disc(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
