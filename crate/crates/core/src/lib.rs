//! Simulation and verification toolkit for spatially extended hybrid
//! Rayleigh-van der Pol oscillators.
//!
//! The crate integrates single oscillators ([`ode`]), nearest-neighbour
//! chains ([`chain`]) and the continuum wave equation ([`pde`]), and checks
//! them against closed-form travelling waves and synchronization
//! frequencies ([`analysis`], [`network`]).

pub mod analysis;
pub mod chain;
mod error;
pub mod model;
pub mod network;
pub mod ode;
pub mod pde;

pub use error::{Error, Result};
pub use model::{BoundarySpec, Field, Grid1D, InitialCondition, ModelParams};
