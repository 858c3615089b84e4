//! Momentum-space kernels `Γ±(p, p0) = (1/2π) Σ_n c±_n φ̃_n(p0)* φ̃_n(p)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::coefficients::{per_mode_coefficients, PerModeCoefficients};
use crate::engine::dense::default_truncation;
use crate::error::{Error, Result};
use crate::well::{phi_tilde, WaveguideSpec};

/// Modes are added in blocks of this size before the stopping test.
pub const BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// Relative size of the last block below which summation stops.
    pub tol: f64,
    /// Hard cap on the number of modes.
    pub max_modes: usize,
    /// Floor on the number of modes; `None` uses `max(4n⋆, n⋆ + 32)`.
    pub min_modes: Option<usize>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_modes: 20_000,
            min_modes: None,
        }
    }
}

impl KernelOptions {
    fn floor(&self, n_star: usize) -> usize {
        self.min_modes
            .unwrap_or_else(|| default_truncation(n_star))
            .min(self.max_modes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub modes_used: usize,
    /// Magnitude of the last block, divided by 2π.
    pub tail_estimate: f64,
}

/// Ascending-`n` block summation shared by every kernel path, so that the
/// same coefficients always give bit-identical sums.
fn sum_modes<F>(mut coef: F, p: f64, p0: f64, b: f64, floor: usize, opts: &KernelOptions) -> Result<KernelValue>
where
    F: FnMut(usize) -> Result<(Complex64, Complex64)>,
{
    let zero = Complex64::new(0.0, 0.0);
    let (mut gp, mut gm) = (zero, zero);
    let (mut abs_p, mut abs_m) = (0.0, 0.0);
    let mut n = 1;
    loop {
        let (mut bp, mut bm) = (zero, zero);
        for _ in 0..BLOCK {
            let (cp, cm) = coef(n)?;
            let f = phi_tilde(n, p0, b).conj() * phi_tilde(n, p, b);
            let (tp, tm) = (cp * f, cm * f);
            bp += tp;
            bm += tm;
            abs_p += tp.norm();
            abs_m += tm.norm();
            n += 1;
        }
        gp += bp;
        gm += bm;
        let used = n - 1;
        let tail = bp.norm().max(bm.norm()) / (2.0 * PI);
        // Σ|terms| is the reference scale: it is never smaller than the
        // kernel and stays meaningful when the kernel itself cancels to zero
        if used >= floor && bp.norm() <= opts.tol * abs_p && bm.norm() <= opts.tol * abs_m {
            return Ok(KernelValue {
                gamma_plus: gp / (2.0 * PI),
                gamma_minus: gm / (2.0 * PI),
                modes_used: used,
                tail_estimate: tail,
            });
        }
        if used >= opts.max_modes {
            return Err(Error::Truncation {
                modes: used,
                tail_estimate: tail,
            });
        }
    }
}

fn pair(c: &PerModeCoefficients) -> (Complex64, Complex64) {
    (c.c_plus, c.c_minus)
}

fn check_momenta(p: f64, p0: f64, k: f64) -> Result<()> {
    if !(p.abs() < k) || !(p0.abs() < k) {
        return Err(Error::Domain(format!(
            "kernel needs |p|, |p0| < k = {k}, got p = {p}, p0 = {p0}"
        )));
    }
    Ok(())
}

/// `Γ±(p, p0)` with per-mode coefficients computed on the fly.
pub fn gamma_kernel(p: f64, p0: f64, k: f64, spec: &WaveguideSpec, opts: &KernelOptions) -> Result<KernelValue> {
    check_momenta(p, p0, k)?;
    let floor = opts.floor(spec.n_star(k));
    sum_modes(
        |n| per_mode_coefficients(&spec.mode(n, k), k, spec).map(|c| pair(&c)),
        p,
        p0,
        spec.b(),
        floor,
        opts,
    )
}

/// Per-mode coefficients tabulated once for a fixed `(k, spec)`.
///
/// Lookups past the end of the table fall back to on-the-fly evaluation,
/// which is bit-identical.
#[derive(Debug, Clone)]
pub struct ModeTable {
    k: f64,
    spec: WaveguideSpec,
    coefficients: Vec<PerModeCoefficients>,
}

impl ModeTable {
    pub fn new(k: f64, spec: &WaveguideSpec, modes: usize) -> Result<Self> {
        let coefficients = (1..=modes)
            .map(|n| per_mode_coefficients(&spec.mode(n, k), k, spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            k,
            spec: *spec,
            coefficients,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn spec(&self) -> &WaveguideSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficients of mode `n` (1-based).
    pub fn get(&self, n: usize) -> Result<PerModeCoefficients> {
        match self.coefficients.get(n - 1) {
            Some(c) => Ok(*c),
            None => per_mode_coefficients(&self.spec.mode(n, self.k), self.k, &self.spec),
        }
    }

    pub fn gamma(&self, p: f64, p0: f64, opts: &KernelOptions) -> Result<KernelValue> {
        check_momenta(p, p0, self.k)?;
        self.gamma_unchecked(p, p0, opts)
    }

    /// The same mode sum without the light-cone check, for coefficient
    /// functions sampled at `|p| ≥ k`.
    pub(crate) fn gamma_unchecked(&self, p: f64, p0: f64, opts: &KernelOptions) -> Result<KernelValue> {
        let floor = opts.floor(self.spec.n_star(self.k));
        sum_modes(|n| self.get(n).map(|c| pair(&c)), p, p0, self.spec.b(), floor, opts)
    }

    /// Long-guide approximation: only propagating modes transmit, and
    /// evanescent modes reflect with their `a → ∞` factor `t_n`.
    pub fn gamma_large_length(&self, p: f64, p0: f64, opts: &KernelOptions) -> Result<KernelValue> {
        check_momenta(p, p0, self.k)?;
        let ns = self.spec.n_star(self.k);
        let floor = opts.floor(ns);
        let zero = Complex64::new(0.0, 0.0);
        sum_modes(
            |n| {
                let c = self.get(n)?;
                Ok(if n <= ns { pair(&c) } else { (zero, c.t_n) })
            },
            p,
            p0,
            self.spec.b(),
            floor,
            opts,
        )
    }

    /// Filter approximation: no transmission, every mode reflects with `t_n`.
    pub fn gamma_filter(&self, p: f64, p0: f64, opts: &KernelOptions) -> Result<KernelValue> {
        check_momenta(p, p0, self.k)?;
        let floor = opts.floor(self.spec.n_star(self.k));
        let zero = Complex64::new(0.0, 0.0);
        sum_modes(
            |n| self.get(n).map(|c| (zero, c.t_n)),
            p,
            p0,
            self.spec.b(),
            floor,
            opts,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::basis::InfiniteWell;
    use crate::engine::dense::assemble_gamma_general;

    fn opts() -> KernelOptions {
        KernelOptions::default()
    }

    #[test]
    fn empty_guide_has_no_interior_reflection() {
        let s = WaveguideSpec::new(-1.0, 2.0, PI, 0.0).unwrap();
        let g = gamma_kernel(0.4, -1.1, 2.5, &s, &opts()).unwrap();
        assert_eq!(g.gamma_minus, Complex64::new(0.0, 0.0));
        assert!(g.gamma_plus.norm() > 1e-3);
    }

    #[test]
    fn swap_symmetry_is_exact() {
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let a = gamma_kernel(0.7, -0.2, 2.5, &s, &opts()).unwrap();
        let b = gamma_kernel(0.2, -0.7, 2.5, &s, &opts()).unwrap();
        assert_eq!(a.gamma_plus, b.gamma_plus);
        assert_eq!(a.gamma_minus, b.gamma_minus);
    }

    #[test]
    fn table_and_on_the_fly_agree_bitwise() {
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let t = ModeTable::new(2.5, &s, 16).unwrap();
        let a = t.gamma(0.3, 0.3, &opts()).unwrap();
        let b = gamma_kernel(0.3, 0.3, 2.5, &s, &opts()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diagonal_sum_matches_dense_assembly() {
        let (k, p, p0) = (2.5, 0.3, 0.3);
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let n = 48;
        let o = KernelOptions {
            min_modes: Some(n),
            max_modes: n,
            tol: 1.0,
        };
        let g = gamma_kernel(p, p0, k, &s, &o).unwrap();
        let basis = InfiniteWell { b: PI, v0: s.v0() };
        let (gp, gm) = assemble_gamma_general(&basis, k, &s, n).unwrap();
        let (mut dp, mut dm) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for j in 0..n {
            let f = phi_tilde(j + 1, p0, PI).conj() * phi_tilde(j + 1, p, PI) / (2.0 * PI);
            dp += gp.matrix[(j, j)] * f;
            dm += gm.matrix[(j, j)] * f;
        }
        assert!((g.gamma_plus - dp).norm() < 1e-8);
        assert!((g.gamma_minus - dm).norm() < 1e-8);
    }

    #[test]
    fn truncation_error_reports_tail() {
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let o = KernelOptions {
            tol: 1e-16,
            max_modes: 16,
            min_modes: Some(8),
        };
        match gamma_kernel(0.3, 0.1, 2.5, &s, &o) {
            Err(Error::Truncation { modes, tail_estimate }) => {
                assert_eq!(modes, 16);
                assert!(tail_estimate > 0.0);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_momenta_outside_light_cone() {
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        assert!(matches!(
            gamma_kernel(2.5, 0.0, 2.5, &s, &opts()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn filter_approximation_applies_deep_in_gap() {
        let s = WaveguideSpec::new(0.0, 20.0, PI, 10.0).unwrap();
        let t = ModeTable::new(0.5, &s, 64).unwrap();
        let full = t.gamma(0.1, 0.2, &opts()).unwrap();
        let approx = t.gamma_filter(0.1, 0.2, &opts()).unwrap();
        assert!(full.gamma_plus.norm() < 1e-20);
        assert!((full.gamma_minus - approx.gamma_minus).norm() < 1e-20);
    }

    mod props {
        use super::*;
        use crate::well::eta;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn swap_symmetry(p in -0.99f64..0.99, p0 in -0.99f64..0.99, v0 in -2.0f64..5.0, a in 0.5f64..6.0) {
                let k = 2.3;
                let s = WaveguideSpec::new(-0.2 * a, 0.8 * a, 2.1, v0).unwrap();
                let g1 = gamma_kernel(p * k, p0 * k, k, &s, &opts());
                let g2 = gamma_kernel(-p0 * k, -p * k, k, &s, &opts());
                if let (Ok(g1), Ok(g2)) = (g1, g2) {
                    prop_assert!((g1.gamma_plus - g2.gamma_plus).norm() <= 1e-12);
                    prop_assert!((g1.gamma_minus - g2.gamma_minus).norm() <= 1e-12);
                }
            }

            #[test]
            fn large_length_approximation_error_is_exponentially_small(
                k in 1.2f64..4.0, v0 in -1.0f64..1.0, p in -0.9f64..0.9, p0 in -0.9f64..0.9,
            ) {
                let b = 1.0;
                prop_assume!(k * k > (PI / b).powi(2) + v0);
                let e = eta(k, b, v0);
                let a = 12.0 * b / e;
                let s = WaveguideSpec::new(0.0, a, b, v0).unwrap();
                let t = ModeTable::new(k, &s, 64).unwrap();
                let full = t.gamma(p * k, p0 * k, &opts());
                prop_assume!(full.is_ok());
                let full = full.unwrap();
                let approx = t.gamma_large_length(p * k, p0 * k, &opts()).unwrap();
                let bound = 10.0 * (-(2f64.sqrt()) * PI * a * e / b).exp();
                prop_assert!((full.gamma_plus - approx.gamma_plus).norm() <= bound);
                prop_assert!((full.gamma_minus - approx.gamma_minus).norm() <= bound);
            }
        }
    }
}
