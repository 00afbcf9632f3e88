//! Quantum-noise models for squeezed-light enhanced laser interferometers.
//!
//! - [`quadrature`]: vacuum-normalized 2×2 covariances, loss and loss chains.
//! - [`opo`]: squeezed-light source model and parameter fitting.
//! - [`ifo`]: Sagnac and Michelson quantum-noise spectra with homodyne readout.

pub mod error;
pub mod ifo;
pub mod opo;
pub mod quadrature;
pub mod simplex;

pub use error::{Error, Result};

pub mod constants {
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
}
