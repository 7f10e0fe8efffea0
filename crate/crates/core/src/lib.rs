//! Finite-difference micromagnetic engine.
//!
//! Integrates the Landau-Lifshitz-Gilbert equation with forward Euler steps
//! on a regular 3D grid. The effective field combines exchange (six-neighbour
//! stencil), uniaxial anisotropy, a time-scheduled applied field, and the
//! demagnetizing field computed by zero-padded FFT convolution.
//!
//! All quantities are SI internally; unit conversions happen in [`io`].

pub mod demag;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod local_fields;
pub mod mesh;
pub mod vec3;

pub use error::{Error, Result};
pub use mesh::{Grid, MaterialParams, VectorField, MU0};
