//! Few-mode quantization of tabulated electromagnetic spectral densities.
//!
//! A spectral density J(ω) sampled from a classical electromagnetic solver is
//! fitted to a model of N lossy, mutually interacting modes,
//! J_mod(ω) = (1/π)·Im{gᵀ(H̃ − ω)⁻¹g} with H̃ = ω_ij − (i/2)κ_iδ_ij. The fitted
//! model then drives emitter dynamics (a few-mode master equation) and field
//! reconstruction, while an exact continuum solver on the original table serves
//! as a reference.
//!
//! The spectral-model layer and the linear algebra under it are generic over
//! [`Real`] (`f32` or `f64`); fitting, dynamics and field reconstruction run in
//! `f64`. Concrete aliases for the common case live at the crate root.

// NaN-rejecting comparisons and index loops are intentional in the numerics
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod field;
pub mod fitting;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod spectral;
pub mod synthetic;
pub mod tolerances;
pub mod units;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real, C64};
pub use tolerances::Tolerances;

/// Model parameters in double precision.
pub type ModelParams = model::ModelParameters<f64>;
/// Model parameters in single precision.
pub type ModelParamsF32 = model::ModelParameters<f32>;
/// Spectral density table in double precision.
pub type Spectrum = model::SpectralDensityTable<f64>;
/// Spectral density table in single precision.
pub type SpectrumF32 = model::SpectralDensityTable<f32>;
/// Poles of H̃ in double precision.
pub type Poles = model::PoleSet<f64>;
/// Effective Hamiltonian in double precision.
pub type Hamiltonian = model::EffectiveHamiltonian<f64>;
/// Dense real matrix in double precision.
pub type Matrix = linalg::Mat<f64>;
