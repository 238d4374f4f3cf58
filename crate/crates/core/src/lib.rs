//! Linear spectra and nonlinear two-mode response of "antenna" resonators:
//! a doubly clamped (or cantilevered) Euler–Bernoulli beam carrying
//! symmetric arrays of small cantilevers along its length.

pub mod beam;
pub mod config;
pub mod error;
pub mod galerkin;
pub mod interp;
pub mod kernel;
pub mod model;
pub mod nonlinear;
pub mod profile;
pub mod quadrature;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};
