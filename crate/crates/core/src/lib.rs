//! Scattering of scalar waves by a finite rectangular waveguide with
//! impenetrable walls, computed through the transfer-matrix generator on
//! `ℂ² ⊗ L²` and its exceptional points.

pub mod dispersion;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod scattering;
pub mod well;

pub use dispersion::{BranchedRoot, Incidence, Side};
pub use error::{Error, Result};
pub use well::{ModeRecord, WaveguideSpec};
