//! Spectral simulation and analysis of the two-interface Muskat problem in a
//! periodic porous strip.
//!
//! Two immiscible fluids fill {-1 < y < 1 + h(x)}, separated by y = f(x), with
//! air above. The crate provides the linear stability theory of the flat
//! state, transformed-domain elliptic solvers for the nonlinear evolution,
//! and continuation of finger-shaped equilibria.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod elliptic;
pub mod equilibria;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod params;
pub mod spectrum;
pub mod state;
pub mod symbols;

pub use config::Config;
pub use error::{Error, Result};
pub use fourier::TrigPoly;
pub use params::PhysParams;
pub use state::{BoundaryData, InterfaceState};
pub use symbols::SymbolQuad;
