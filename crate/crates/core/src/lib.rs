//! Numerical and symbolic laboratory for scale-filtered nonlinear PDEs on
//! the periodic torus.

pub mod burgers;
pub mod config;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod families;
pub mod field;
pub mod fluid;
pub mod heat;
pub mod io;
pub mod jet;
pub mod residual;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Field, TensorField};
pub use spectral::{Grid, SpectralField};
