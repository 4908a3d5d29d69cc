//! Tolerance defaults in one place. Every threshold used by validation and by
//! the numerical routines reads from a [`Tolerances`] record so callers can
//! override any of them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Negative J values down to `-neg_j_rel * max(J)` are clamped to zero at ingestion.
    pub neg_j_rel: f64,
    /// Off-diagonal magnitude (relative to max |ω|) below which ω counts as diagonal.
    pub diagonal_rel: f64,
    /// Eigenvalues closer than this (eV) are treated as degenerate poles.
    pub degenerate_pole_ev: f64,
    /// Eigenvector condition number above which H̃ is reported defective.
    pub max_eigvec_condition: f64,
    /// Kernel phase per time step allowed by the Volterra solver (rad).
    pub max_phase_per_step: f64,
    /// Relative tolerance of the adaptive amplitude integrator.
    pub ode_rtol: f64,
    /// Absolute tolerance of the adaptive amplitude integrator.
    pub ode_atol: f64,
    /// Largest Liouvillian phase per fixed RK4 step in the dense master equation.
    pub rk4_phase_per_step: f64,
    /// Allowed drift of tr(ρ) in the dense Lindblad propagation.
    pub trace_drift: f64,
    /// Edge-to-peak ratio above which a spectrum is flagged as under-covered.
    pub coverage_edge_rel: f64,
    /// Edge-to-peak ratio of the field-kernel integrand above which coverage is flagged.
    pub kernel_edge_rel: f64,
    /// Kernel tail ratio (|K(τ_max)| / max |K|) above which truncation is flagged.
    pub kernel_tail_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            neg_j_rel: 1e-12,
            diagonal_rel: 1e-14,
            degenerate_pole_ev: 1e-12,
            max_eigvec_condition: 1e8,
            max_phase_per_step: 0.5,
            ode_rtol: 1e-11,
            ode_atol: 1e-13,
            rk4_phase_per_step: 0.02,
            trace_drift: 1e-9,
            coverage_edge_rel: 1e-4,
            kernel_edge_rel: 1e-3,
            kernel_tail_rel: 1e-6,
        }
    }
}

impl Tolerances {
    /// Tighter integrator and conditioning thresholds.
    pub fn strict() -> Self {
        Self {
            ode_rtol: 1e-13,
            ode_atol: 1e-15,
            max_eigvec_condition: 1e6,
            rk4_phase_per_step: 0.01,
            ..Self::default()
        }
    }
}
