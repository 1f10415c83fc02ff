//! Floquet transfer-matrix simulator for the three-dimensional kicked rotor
//! at the fractional quantum resonance `τ = 4π/3`, together with the
//! tight-binding band theory and the analytic edge state at `l = 0`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubic;
pub mod dynamics;
pub mod edge;
pub mod error;
pub mod floquet;
pub mod specfun;
pub mod spectral;
pub mod tightbinding;
pub mod verify;

pub use error::{Error, Result};
pub use floquet::{alpha, build_floquet, BuildMode, FloquetMatrix, RotorParams, TauFrac};
pub use spectral::{eigendecompose, Spectrum};
