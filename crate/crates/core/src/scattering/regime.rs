//! Classification of `(k, guide)` into the analytically distinguished
//! regimes.

use std::f64::consts::PI;

use crate::dispersion::{is_exceptional, DEFAULT_EXCEPTIONAL_TOL};
use crate::well::{eta, WaveguideSpec};

/// Minimum `a·η(k)/b` for the long-guide approximation.
pub const LARGE_LENGTH_RATIO: f64 = 10.0;
/// Required factor between the filter bound and `k`.
pub const FILTER_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Empty,
    Exceptional,
    Filter,
    LargeLengthPropagating,
    Generic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Empty => "empty",
            Regime::Exceptional => "exceptional",
            Regime::Filter => "filter",
            Regime::LargeLengthPropagating => "large_a_propagating",
            Regime::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub n_star: usize,
    /// `η(k)` when the ground state propagates.
    pub eta: Option<f64>,
    /// `a |w_{n⋆+1}|`, the smallest evanescent decay exponent.
    pub min_evanescent_decay: f64,
    /// Mode at an exceptional point, if any.
    pub exceptional_mode: Option<usize>,
    /// `sqrt(V0 + π²/b² - 1/a²)/k` when the first filter condition holds.
    pub filter_margin: Option<f64>,
    /// `a η(k)/b` when defined.
    pub length_ratio: Option<f64>,
}

/// Regime of `(k, spec)`, tested in the order empty, exceptional, filter,
/// long guide, generic. Complex potentials are classified by `Re V0` and
/// never exceptional.
pub fn classify_regime(k: f64, spec: &WaveguideSpec) -> RegimeReport {
    let (a, b) = (spec.a(), spec.b());
    let v = spec.v0().re;
    let n_star = spec.n_star(k);
    let q1 = PI / b;
    let ground_propagates = k * k >= q1 * q1 + v;
    let eta_k = ground_propagates.then(|| eta(k, b, v));
    let length_ratio = eta_k.map(|e| a * e / b);
    let min_evanescent_decay = a * spec.mode(n_star + 1, k).w.norm();
    let exceptional_mode = spec
        .real_v0()
        .and_then(|v0| is_exceptional(k, b, v0, DEFAULT_EXCEPTIONAL_TOL));
    let filter_margin = {
        let s = v + q1 * q1 - 1.0 / (a * a);
        (v > 1.0 / (a * a) - q1 * q1 && s > 0.0).then(|| s.sqrt() / k)
    };
    let regime = if spec.is_empty_guide() {
        Regime::Empty
    } else if exceptional_mode.is_some() {
        Regime::Exceptional
    } else if filter_margin.is_some_and(|m| m >= FILTER_MARGIN) {
        Regime::Filter
    } else if ground_propagates && length_ratio.is_some_and(|r| r >= LARGE_LENGTH_RATIO) {
        Regime::LargeLengthPropagating
    } else {
        Regime::Generic
    };
    RegimeReport {
        regime,
        n_star,
        eta: eta_k,
        min_evanescent_decay,
        exceptional_mode,
        filter_margin,
        length_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn examples() {
        let s = WaveguideSpec::new(0.0, 20.0, PI, 10.0).unwrap();
        assert_eq!(classify_regime(0.5, &s).regime, Regime::Filter);
        let e = WaveguideSpec::new(0.0, 20.0, PI, 0.0).unwrap();
        assert_eq!(classify_regime(0.5, &e).regime, Regime::Empty);
        assert_eq!(classify_regime(2.0, &e).regime, Regime::Empty);
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let r = classify_regime(5f64.sqrt(), &s);
        assert_eq!(r.regime, Regime::Exceptional);
        assert_eq!(r.exceptional_mode, Some(2));
    }

    #[test]
    fn long_guide_and_generic() {
        let s = WaveguideSpec::new(0.0, 200.0, PI, 0.5).unwrap();
        let r = classify_regime(2.5, &s);
        assert_eq!(r.regime, Regime::LargeLengthPropagating);
        assert!(r.length_ratio.unwrap() >= 10.0);
        assert!(r.min_evanescent_decay > 2f64.sqrt() * PI * r.length_ratio.unwrap());
        let s = WaveguideSpec::new(0.0, 2.0, PI, 0.5).unwrap();
        assert_eq!(classify_regime(2.5, &s).regime, Regime::Generic);
    }

    #[test]
    fn complex_potential_is_never_exceptional() {
        let s = WaveguideSpec::with_complex_v0(0.0, 2.0, PI, Complex64::new(1.0, 0.1)).unwrap();
        let r = classify_regime(5f64.sqrt(), &s);
        assert_eq!(r.exceptional_mode, None);
        assert_ne!(r.regime, Regime::Exceptional);
    }

    #[test]
    fn diagnostics_are_reported() {
        let s = WaveguideSpec::new(0.0, 20.0, PI, 10.0).unwrap();
        let r = classify_regime(0.5, &s);
        assert_eq!(r.n_star, 0);
        assert!(r.eta.is_none());
        assert!(r.filter_margin.unwrap() > 2.0);
        assert!(r.min_evanescent_decay > 20.0 * 3.0);
    }
}
