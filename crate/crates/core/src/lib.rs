//! Numerical laboratory for Besov-Lizorkin-Triebel norms, their continuous
//! characterizations, ax+b group coorbit norms, and spline wavelet frames,
//! at desk scale (d = 1, 2).

pub mod error;
pub mod fourier;
pub mod grid;
pub mod kernels;
pub mod transform;

pub use error::{LabError, Result};
