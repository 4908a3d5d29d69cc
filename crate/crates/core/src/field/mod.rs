//! Field reconstruction from the emitter's two-time correlation and a
//! tabulated Green's function.
//!
//! Units: the kernel is stored in V/m per (e·nm) per fs, correlations in
//! (e·nm)², so the positive-frequency field E⁺ comes out in V/m. Intensities
//! are reported as the cycle-averaged irradiance 2ε₀c·⟨E⁻·E⁺⟩ in W/m².

mod correlation;
mod greens;
mod intensity;
mod kernel;

pub use correlation::{emitter_correlation, CorrelationTable};
pub use greens::GreensFunctionTable;
pub use intensity::{
    field_intensity, field_intensity_with, intensity_map, IntensityMap, IntensityPath, IntensityTraces, MAX_MAP_VALUES,
};
pub use kernel::{compute_kernel, compute_kernel_with, FieldKernelTable};
