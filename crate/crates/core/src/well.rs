//! Infinite rectangular well: geometry, mode records, Fourier transforms of
//! the normalised modes `φ_n(y) = sqrt(2/b) sin(πny/b)` on `[0, b]`, and the
//! closed-form projector kernel.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{n_star, varpi_mode, w_mode, BranchedRoot};
use crate::error::{Error, Result};

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Waveguide occupying `a_minus <= x <= a_plus`, `0 <= y <= b`, with a
/// constant (possibly complex) interior potential `V0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideSpec {
    a_minus: f64,
    a_plus: f64,
    b: f64,
    v0: Complex64,
}

impl WaveguideSpec {
    pub fn new(a_minus: f64, a_plus: f64, b: f64, v0: f64) -> Result<Self> {
        Self::with_complex_v0(a_minus, a_plus, b, Complex64::new(v0, 0.0))
    }

    pub fn with_complex_v0(a_minus: f64, a_plus: f64, b: f64, v0: Complex64) -> Result<Self> {
        if !a_minus.is_finite() || !a_plus.is_finite() {
            return Err(Error::invalid("a_minus/a_plus", "must be finite"));
        }
        if !(a_plus > a_minus) {
            return Err(Error::invalid(
                "a_plus",
                format!("must exceed a_minus ({a_plus} <= {a_minus})"),
            ));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid("b", format!("must be positive, got {b}")));
        }
        if !v0.re.is_finite() || !v0.im.is_finite() {
            return Err(Error::invalid("V0", "must be finite"));
        }
        Ok(Self { a_minus, a_plus, b, v0 })
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    /// Length `a = a_plus - a_minus`.
    pub fn a(&self) -> f64 {
        self.a_plus - self.a_minus
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn v0(&self) -> Complex64 {
        self.v0
    }

    /// `Some(V0)` when the potential is real.
    pub fn real_v0(&self) -> Option<f64> {
        (self.v0.im == 0.0).then_some(self.v0.re)
    }

    pub fn is_empty_guide(&self) -> bool {
        self.v0 == Complex64::new(0.0, 0.0)
    }

    /// `E_n = (πn/b)² + V0`.
    pub fn energy(&self, n: usize) -> Complex64 {
        let q = PI * n as f64 / self.b;
        self.v0 + q * q
    }

    pub fn mode(&self, n: usize, k: f64) -> ModeRecord {
        let energy = self.energy(n);
        ModeRecord {
            n,
            energy,
            w: w_mode(energy, k),
            varpi: varpi_mode(n, k, self.b),
        }
    }

    /// Propagating-mode count, using `Re V0` for complex potentials.
    pub fn n_star(&self, k: f64) -> usize {
        n_star(k, self.b, self.v0.re)
    }
}

/// Per-mode data at a fixed wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRecord {
    pub n: usize,
    pub energy: Complex64,
    pub w: BranchedRoot,
    pub varpi: BranchedRoot,
}

impl ModeRecord {
    pub fn w(&self) -> Complex64 {
        self.w.value()
    }

    pub fn varpi(&self) -> Complex64 {
        self.varpi.value()
    }
}

/// Fourier transform `∫_0^b e^{-ipy} φ_n(y) dy`.
///
/// Evaluated in a cancellation-free form; negative `p` goes through the
/// reflection `φ̃_n(-p) = φ̃_n(p)*` so that identity holds bit for bit.
pub fn phi_tilde(n: usize, p: f64, b: f64) -> Complex64 {
    if p < 0.0 {
        return phi_tilde(n, -p, b).conj();
    }
    let m = PI * n as f64;
    let u = b * p;
    let d = u - m;
    let phase = Complex64::from_polar(1.0, -0.5 * d);
    Complex64::new(0.0, -m * (2.0 * b).sqrt() * sinc(0.5 * d) / (u + m)) * phase
}

/// Closed form of `Σ_n φ̃_n(p0)* φ̃_n(p) = ∫_0^b e^{i(p0-p)y} dy`.
pub fn lambda_kernel(p: f64, p0: f64, b: f64) -> Complex64 {
    let h = 0.5 * (p0 - p) * b;
    Complex64::from_polar(b * sinc(h), h)
}

/// Outcome of [`appendix_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// `a |w_n|`
    pub lhs: f64,
    /// `sqrt(2) π a η(k) / b`
    pub rhs: f64,
    pub eta: f64,
    pub holds: bool,
}

/// `η(k) = sqrt(n⋆ + 1 - (b/π) sqrt(k² - V0))`, in `(0, 1]`.
pub fn eta(k: f64, b: f64, v0: f64) -> f64 {
    let x = b / PI * (k * k - v0).max(0.0).sqrt();
    (n_star(k, b, v0) as f64 + 1.0 - x).sqrt()
}

/// Lower bound on evanescent decay lengths: `a|w_n| > sqrt(2) π a η(k)/b`
/// for every `n > n⋆` once the ground state propagates.
pub fn appendix_bound_check(k: f64, b: f64, v0: f64, n: usize, a: f64) -> Result<BoundCheck> {
    if !(b > 0.0) || !(a > 0.0) || !(k > 0.0) {
        return Err(Error::Domain("k, b and a must be positive".into()));
    }
    let q1 = PI / b;
    if k * k < q1 * q1 + v0 {
        return Err(Error::Domain(format!(
            "k² = {} is below the ground-state energy {}",
            k * k,
            q1 * q1 + v0
        )));
    }
    let ns = n_star(k, b, v0);
    if n <= ns {
        return Err(Error::Domain(format!("mode {n} is not above n⋆ = {ns}")));
    }
    let e = eta(k, b, v0);
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::Domain(format!("η(k) = {e} outside (0, 1]")));
    }
    let q = PI * n as f64 / b;
    let w = w_mode(Complex64::new(q * q + v0, 0.0), k);
    let lhs = a * w.norm();
    let rhs = 2f64.sqrt() * PI * a * e / b;
    Ok(BoundCheck {
        lhs,
        rhs,
        eta: e,
        holds: lhs > rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::{integrate, QuadratureOptions};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Literal closed form, used away from its removable singularity.
    fn phi_tilde_literal(n: usize, p: f64, b: f64) -> Complex64 {
        let m = PI * n as f64;
        let u = b * p;
        let num = Complex64::from_polar(1.0, -(u - m)) - 1.0;
        num * (m * (2.0 * b).sqrt() / (u * u - m * m))
    }

    #[test]
    fn spec_rejects_bad_geometry() {
        assert!(WaveguideSpec::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(WaveguideSpec::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(WaveguideSpec::new(0.0, 1.0, 1.0, f64::NAN).is_err());
        let s = WaveguideSpec::new(-1.0, 2.5, 3.0, 1.0).unwrap();
        assert_eq!(s.a(), 3.5);
        assert_eq!(s.real_v0(), Some(1.0));
    }

    #[test]
    fn mode_record_relations() {
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let m = s.mode(2, 2.5);
        assert!(close(m.energy, Complex64::new(5.0, 0.0), 1e-14));
        assert!(close(m.w() * m.w(), m.varpi() * m.varpi() - 1.0, 1e-13));
    }

    #[test]
    fn phi_tilde_examples() {
        let v = phi_tilde(2, 2.0, PI);
        assert!(close(v, Complex64::new(0.0, -(PI / 2.0).sqrt()), 1e-15));
        let v = phi_tilde(1, 0.0, PI);
        assert!(close(v, Complex64::new(1.595_769_121_605_731, 0.0), 1e-14));
        assert!(phi_tilde(2, 0.0, PI).norm() < 1e-16);
        let v = phi_tilde(3, -3.0, PI);
        assert!(close(v, Complex64::new(0.0, (PI / 2.0).sqrt()), 1e-15));
    }

    #[test]
    fn phi_tilde_matches_literal_form() {
        for n in 1..6 {
            for &p in &[-3.7, -0.4, 0.25, 1.3, 2.9, 7.1] {
                for &b in &[0.8, PI, 4.4] {
                    let u = b * p;
                    if (u.abs() - PI * n as f64).abs() < 0.3 {
                        continue;
                    }
                    let a = phi_tilde(n, p, b);
                    let l = phi_tilde_literal(n, p, b);
                    assert!(close(a, l, 1e-13 * (1.0 + l.norm())), "{n} {p} {b}: {a} {l}");
                }
            }
        }
    }

    #[test]
    fn phi_tilde_continuous_at_singularity() {
        let b = 2.3;
        let p0 = 3.0 * PI / b;
        let at = phi_tilde(3, p0, b);
        assert!(close(at, Complex64::new(0.0, -(b / 2.0).sqrt()), 1e-15));
        for &eps in &[1e-3, 1e-6, 1e-9] {
            assert!(close(phi_tilde(3, p0 + eps, b), at, 3.0 * eps));
        }
    }

    #[test]
    fn phi_tilde_by_direct_quadrature() {
        let b: f64 = 1.7;
        let opts = QuadratureOptions::default();
        for n in 1..4 {
            for &p in &[-2.0, 0.0, 1.1, 5.0] {
                let f = |y: f64| Complex64::from_polar((2.0 / b).sqrt() * (PI * n as f64 * y / b).sin(), -p * y);
                let q = integrate(&f, 0.0, b, &opts).unwrap().value;
                assert!(close(q, phi_tilde(n, p, b), 1e-11));
            }
        }
    }

    #[test]
    fn lambda_kernel_examples() {
        assert!(close(lambda_kernel(0.7, 0.7, 2.0), Complex64::new(2.0, 0.0), 1e-15));
        assert!(lambda_kernel(0.3 + 2.0 * PI / 1.5, 0.3, 1.5).norm() < 1e-15);
        assert!(close(lambda_kernel(1.0, 0.0, PI), Complex64::new(0.0, -2.0), 1e-15));
    }

    #[test]
    fn mode_sum_converges_to_lambda_kernel() {
        let b = 1.3;
        let n_max = 512;
        let samples = [(0.0, 0.0), (3.0, -1.5), (-6.0, 6.0), (6.1, 2.2), (-4.4, -6.1)];
        for &(ps, p0s) in &samples {
            let (p, p0) = (ps / b, p0s / b);
            let exact = lambda_kernel(p, p0, b);
            let mut partial = Complex64::new(0.0, 0.0);
            let mut cesaro = Complex64::new(0.0, 0.0);
            let mut checkpoints = Vec::new();
            for n in 1..=n_max {
                partial += phi_tilde(n, p0, b).conj() * phi_tilde(n, p, b);
                cesaro += partial;
                if n.is_power_of_two() && n >= 32 {
                    checkpoints.push((cesaro / n as f64 - exact).norm());
                }
            }
            let last = *checkpoints.last().unwrap();
            assert!(last < 1e-2 * b, "residual {last} at ({p}, {p0})");
            for w in checkpoints.windows(2) {
                assert!(w[1] <= w[0] * 1.0001, "residuals not decreasing: {checkpoints:?}");
            }
        }
    }

    #[test]
    fn parseval_on_the_well() {
        let b = 2.1;
        let opts = QuadratureOptions {
            abs_tol: 1e-12,
            ..Default::default()
        };
        for n in 1..4 {
            // |φ̃_n|² decays like p^-4; the tail beyond ±L is bounded by
            // 2·(8πn²/b)·∫_L^∞ p^-4 dp/2π
            let l = 4000.0;
            let f = |p: f64| Complex64::new(phi_tilde(n, p, b).norm_sqr() / (2.0 * PI), 0.0);
            let mut total = 0.0;
            let edges: Vec<f64> = (-40..=40).map(|i| i as f64 * l / 40.0).collect();
            for e in edges.windows(2) {
                total += integrate(&f, e[0], e[1], &opts).unwrap().value.re;
            }
            let m = PI * n as f64;
            let tail = 2.0 * 8.0 * m * m / b.powi(3) / (3.0 * l.powi(3)) / (2.0 * PI);
            assert!((total + tail - 1.0).abs() < 1e-6, "n={n}: {total}");
        }
    }

    #[test]
    fn appendix_bound_examples() {
        let c = appendix_bound_check(2.5, PI, 0.0, 3, 1.0).unwrap();
        assert!((c.lhs - 2.75f64.sqrt()).abs() < 1e-12);
        assert!((c.rhs - 1.0).abs() < 1e-12);
        assert!(c.holds);
        let c = appendix_bound_check(2.999, PI, 0.0, 3, 1.0).unwrap();
        assert!(c.holds && c.eta < 0.04 && c.rhs < 0.05);
        let c = appendix_bound_check(1.0, PI, 0.0, 2, 1.0).unwrap();
        assert!((c.lhs - 3f64.sqrt()).abs() < 1e-12);
        assert!((c.rhs - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.holds);
        assert!(appendix_bound_check(0.5, PI, 0.0, 2, 1.0).is_err());
        assert!(appendix_bound_check(2.5, PI, 0.0, 2, 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn phi_tilde_reflection(n in 1usize..50, p in -30.0f64..30.0, b in 0.2f64..8.0) {
                prop_assert_eq!(phi_tilde(n, -p, b), phi_tilde(n, p, b).conj());
            }

            #[test]
            fn appendix_bound_always_holds(
                b in 0.5f64..6.0, v0 in -5.0f64..10.0, extra in 1e-6f64..30.0,
                dn in 1usize..20, a in 0.1f64..50.0,
            ) {
                prop_assume!((PI / b).powi(2) + v0 > 0.0);
                let k = ((PI / b).powi(2) + v0 + extra).sqrt();
                let n = n_star(k, b, v0) + dn;
                let c = appendix_bound_check(k, b, v0, n, a).unwrap();
                prop_assert!(c.holds, "{:?}", c);
            }
        }
    }
}
