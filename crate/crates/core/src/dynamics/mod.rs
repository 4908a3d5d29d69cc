//! Emitter dynamics in the spontaneous-emission (Wigner–Weisskopf) scenario.
//!
//! * [`solve_ww_exact`]: the continuum problem for an arbitrary tabulated
//!   J(ω), as a Volterra integro-differential equation. Reference solution.
//! * [`solve_fewmode_single_excitation`]: the few-mode model restricted to
//!   the single-excitation sector (non-Hermitian amplitude equations).
//! * [`solve_lindblad_dense`]: the full master equation on a truncated Fock
//!   space, for checking the sector reduction and the rotating-wave coupling.
//! * [`tilde_transform`] / [`tilde_populations`]: populations of the
//!   eigenmodes of ω_ij.
//!
//! Amplitudes are reported in the frame rotating at ω_eg; populations are
//! frame independent. Times are in fs at the interface.

mod exact;
mod fewmode;
mod lindblad;
mod ode;
mod tilde;
mod trajectory;

pub use exact::{memory_kernel, solve_ww_exact, solve_ww_exact_with};
pub use fewmode::{solve_fewmode_single_excitation, solve_fewmode_single_excitation_with};
pub use lindblad::{solve_lindblad_dense, solve_lindblad_dense_with, Coupling, LindbladTraces, MAX_HILBERT_DIM};
pub use tilde::{tilde_populations, tilde_transform, TildeBasis};
pub use trajectory::{time_grid, AmplitudeTrajectory, EmitterSpec};
