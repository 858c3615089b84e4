//! Transverse mode bases for the general operator assembly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{varpi, varpi_mode};
use crate::error::Result;
use crate::oracle::quadrature::{branch_split_quadrature, integrate, QuadratureOptions};
use crate::well::phi_tilde;

/// Supplier of an orthonormal transverse basis `φ_n`, `n = 1, 2, …`.
pub trait ModeBasisSpec: Sync {
    /// Eigenvalue `E_n` of `p² + V`; non-decreasing in `n` for real `V`.
    fn energy(&self, n: usize) -> Complex64;

    /// `∫ e^{-ipy} φ_n(y) dy`.
    fn phi_tilde(&self, n: usize, p: f64) -> Complex64;

    /// Momentum beyond which [`ModeBasisSpec::varpi_matrix_element`]'s
    /// default quadrature truncates.
    fn momentum_cutoff(&self, k: f64, m: usize, n: usize) -> f64 {
        let e = self.energy(m.max(n)).re.abs().sqrt();
        64.0 * (k + e + 1.0)
    }

    /// `⟨φ_m|ϖ(p̂)|φ_n⟩ = ∫ φ̃_m(p)* ϖ(p) φ̃_n(p) dp / 2π`.
    ///
    /// The default integrates over `[-P, P]` with `P` from
    /// [`ModeBasisSpec::momentum_cutoff`] and drops the tails.
    fn varpi_matrix_element(&self, m: usize, n: usize, k: f64) -> Result<Complex64> {
        let cut = self.momentum_cutoff(k, m, n);
        let f = |p: f64| self.phi_tilde(m, p).conj() * varpi(p, k).value() * self.phi_tilde(n, p);
        Ok(branch_split_quadrature(&f, -cut, cut, k, 1e-10 * 2.0 * PI)?.value / (2.0 * PI))
    }
}

/// Infinite well of width `b` with `ϖ` acting diagonally,
/// `ϖ|φ_n⟩ = ϖ_n|φ_n⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteWell {
    pub b: f64,
    pub v0: Complex64,
}

impl ModeBasisSpec for InfiniteWell {
    fn energy(&self, n: usize) -> Complex64 {
        let q = PI * n as f64 / self.b;
        self.v0 + q * q
    }

    fn phi_tilde(&self, n: usize, p: f64) -> Complex64 {
        phi_tilde(n, p, self.b)
    }

    fn varpi_matrix_element(&self, m: usize, n: usize, k: f64) -> Result<Complex64> {
        Ok(if m == n {
            varpi_mode(n, k, self.b).value()
        } else {
            Complex64::new(0.0, 0.0)
        })
    }
}

/// Infinite-well modes with `ϖ` taken literally as the compression
/// `Λ ϖ(p̂) Λ` onto `L²[0, b]`, evaluated by quadrature.
///
/// This operator is complex symmetric but not diagonal in the well basis,
/// so it does not commute with `W`; it exercises the general assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressedWell {
    pub b: f64,
    pub v0: Complex64,
    pub tol: f64,
}

impl CompressedWell {
    pub fn new(b: f64, v0: Complex64) -> Self {
        Self { b, v0, tol: 1e-11 }
    }

    /// `(1/2π) A_mn(p) · i sqrt(p² - k²)` continued off the real axis, where
    /// `A_mn` is the non-oscillating factor of `φ̃_m(p)* φ̃_n(p)`.
    fn tail_envelope(&self, m: usize, n: usize, k: f64, p: Complex64) -> Complex64 {
        let (am, an) = (PI * m as f64, PI * n as f64);
        let u2 = p * p * (self.b * self.b);
        let a = am * an * 2.0 * self.b / ((u2 - am * am) * (u2 - an * an));
        let root = (p - k).sqrt() * (p + k).sqrt();
        a * Complex64::i() * root / (2.0 * PI)
    }
}

impl ModeBasisSpec for CompressedWell {
    fn energy(&self, n: usize) -> Complex64 {
        let q = PI * n as f64 / self.b;
        self.v0 + q * q
    }

    fn phi_tilde(&self, n: usize, p: f64) -> Complex64 {
        phi_tilde(n, p, self.b)
    }

    /// Core `[-P, P]` by branch-split quadrature; tails in closed contour
    /// form. For `p > P` the integrand is `g(p)(c₀ + c₊e^{ibp} + c₋e^{-ibp})`
    /// with `c₀ = 1 + (-1)^{m+n}`, `c₊ = -(-1)^m`, `c₋ = -(-1)^n`; the left
    /// tail has `c₊`, `c₋` swapped. Oscillating parts are rotated onto
    /// `p = P ± it`, the rest mapped by `p = P/s`.
    fn varpi_matrix_element(&self, m: usize, n: usize, k: f64) -> Result<Complex64> {
        if (m + n) % 2 == 1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let b = self.b;
        let cut = (1.5 * k).max(PI * (m.max(n) + 1) as f64 / b) + 2.0 * PI / b;
        let f = |p: f64| phi_tilde(m, p, b).conj() * varpi(p, k).value() * phi_tilde(n, p, b) / (2.0 * PI);
        let core = branch_split_quadrature(&f, -cut, cut, k, self.tol)?.value;

        let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
        let c0 = 1.0 + sign(m + n);
        let c_osc = -sign(m) - sign(n);
        let opts = QuadratureOptions {
            abs_tol: self.tol,
            ..Default::default()
        };
        let p0 = Complex64::new(cut, 0.0);

        let smooth = |s: f64| {
            if s == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            self.tail_envelope(m, n, k, p0 / s) * (cut / (s * s))
        };
        let i0 = integrate(&smooth, 0.0, 1.0, &opts)?.value;

        let t_max = 45.0 / b;
        let i = Complex64::i();
        let up = |t: f64| self.tail_envelope(m, n, k, p0 + i * t) * (-b * t).exp();
        let down = |t: f64| self.tail_envelope(m, n, k, p0 - i * t) * (-b * t).exp();
        let i_plus = i * Complex64::from_polar(1.0, b * cut) * integrate(&up, 0.0, t_max, &opts)?.value;
        let i_minus = -i * Complex64::from_polar(1.0, -b * cut) * integrate(&down, 0.0, t_max, &opts)?.value;

        Ok(core + i0 * (2.0 * c0) + (i_plus + i_minus) * c_osc)
    }
}
