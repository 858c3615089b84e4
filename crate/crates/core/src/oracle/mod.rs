//! Independent numerical references: interface matching for 1D slabs, a
//! dense matrix exponential and adaptive quadrature.
//!
//! Nothing here calls the closed-form scattering or propagator code; only the
//! dispersion roots are shared.

pub mod expm;
pub mod quadrature;
pub mod slab;

pub use expm::dense_expm;
pub use quadrature::{branch_split_quadrature, integrate, QuadratureOptions, QuadratureResult};
pub use slab::{interface_transfer, multilayer_transfer, slab_response, InteriorWave, Layer, Slab1D, SlabResponse};
