//! Observables assembled from the per-mode solution of the well: kernels,
//! amplitudes, interior S-matrix, regimes and field maps.

pub mod amplitudes;
pub mod coefficients;
pub mod field;
pub mod kernel;
pub mod regime;
pub mod smatrix;

pub use amplitudes::{
    amplitudes, coefficient_set, mirror_angle, transmission_grid, wall_terms, AmplitudeWithDelta, Amplitudes,
    CoefficientSet, DeltaAndSmooth, DeltaTerm, WallTerm, DEFAULT_EXCLUSION_DEG, DEFAULT_THETA_POINTS,
};
pub use coefficients::{per_mode_coefficients, ModeKind, PerModeCoefficients, EP_LIMIT_THRESHOLD};
pub use field::{field_map, FieldMap, FieldOptions, FieldRegion, FieldSolution, FieldSource};
pub use kernel::{gamma_kernel, KernelOptions, KernelValue, ModeTable};
pub use regime::{classify_regime, Regime, RegimeReport};
pub use smatrix::{interior_s_matrix, mode_injection, s_block, Injection, SBlock};
