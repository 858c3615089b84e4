//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use wavescat::{Incidence, WaveguideSpec};

/// A barrier guide with a few propagating modes at `k = 2.5`.
pub fn barrier() -> WaveguideSpec {
    WaveguideSpec::new(0.0, 2.0, PI, 1.5).expect("valid geometry")
}

/// A long guide whose kernel needs many evanescent modes.
pub fn long_guide() -> WaveguideSpec {
    WaveguideSpec::new(-1.0, 19.0, 1.0, 0.5).expect("valid geometry")
}

pub fn incidence(k: f64) -> Incidence {
    Incidence::new(k, 0.35).expect("valid incidence")
}

/// Evenly spaced transverse momenta inside `(-k, k)`.
pub fn momenta(k: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| k * (-0.9 + 1.8 * j as f64 / (count - 1) as f64))
        .collect()
}
