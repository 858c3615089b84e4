//! Transfer matrices of piecewise-constant 1D media from continuity of `ψ`
//! and `ψ'` at each interface.
//!
//! Outside the layers `ψ = A e^{iqx} + B e^{-iqx}` with global phase
//! reference, so a layer identical to the surrounding medium has the identity
//! as transfer matrix.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Wavevectors below this magnitude are treated as zero outside a layer.
const ZERO_WAVEVECTOR: f64 = 1e-300;

/// A uniform layer between two interfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub x_left: f64,
    pub x_right: f64,
    pub k_inside: Complex64,
}

/// One layer embedded in a uniform medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab1D {
    pub x_left: f64,
    pub x_right: f64,
    pub wavevector_inside: Complex64,
    pub wavevector_outside: Complex64,
}

impl Slab1D {
    pub fn layer(&self) -> Layer {
        Layer {
            x_left: self.x_left,
            x_right: self.x_right,
            k_inside: self.wavevector_inside,
        }
    }

    /// Transfer matrix for amplitudes referenced to each face
    /// (`ψ = A e^{iq(x-x_face)} + …`).
    pub fn face_transfer(&self) -> Result<Matrix2<Complex64>> {
        let m = interface_transfer(self)?;
        let q = self.wavevector_outside;
        let i = Complex64::i();
        let right = Matrix2::new(
            (-i * q * self.x_right).exp(),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            (i * q * self.x_right).exp(),
        );
        let left = Matrix2::new(
            (i * q * self.x_left).exp(),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            (-i * q * self.x_left).exp(),
        );
        // A_face = A_global·e^{iqx_face}
        Ok(right.try_inverse().expect("diagonal phases") * m * left.try_inverse().expect("diagonal phases"))
    }
}

/// Maps plane-wave amplitudes `(A, B)` to `(ψ, ψ')` at `x`.
fn plane_wave_to_state(q: Complex64, x: f64) -> Matrix2<Complex64> {
    let i = Complex64::i();
    let ep = (i * q * x).exp();
    let em = (-i * q * x).exp();
    Matrix2::new(ep, em, i * q * ep, -i * q * em)
}

/// Inverse of [`plane_wave_to_state`] (determinant `-2iq`).
fn state_to_plane_wave(q: Complex64, x: f64) -> Matrix2<Complex64> {
    let i = Complex64::i();
    let ep = (i * q * x).exp();
    let em = (-i * q * x).exp();
    let f = Complex64::new(0.5, 0.0);
    // (1/(-2iq))·[[-iq e^{-iqx}, -e^{-iqx}], [-iq e^{iqx}, e^{iqx}]]
    Matrix2::new(f * em, f * em / (i * q), f * ep, -f * ep / (i * q))
}

/// Propagates `(ψ, ψ')` across a uniform region of width `d`; regular at
/// `k = 0`, where it reduces to `[[1, d], [0, 1]]`.
fn state_propagator(k: Complex64, d: f64) -> Matrix2<Complex64> {
    let z = k * d;
    let cos = z.cos();
    let sin_over_k = if z.norm() < 1e-4 {
        let z2 = z * z;
        (Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0) * d
    } else {
        z.sin() / k
    };
    Matrix2::new(cos, sin_over_k, -k * k * sin_over_k, cos)
}

/// Transfer matrix of a stack of contiguous layers embedded in a medium of
/// wavevector `k_outside`.
pub fn multilayer_transfer(layers: &[Layer], k_outside: Complex64) -> Result<Matrix2<Complex64>> {
    if k_outside.norm() < ZERO_WAVEVECTOR {
        return Err(Error::SingularMatching);
    }
    let (first, last) = match (layers.first(), layers.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok(Matrix2::identity()),
    };
    let mut state = Matrix2::identity();
    let mut x = first.x_left;
    for layer in layers {
        if !(layer.x_right > layer.x_left) {
            return Err(Error::invalid("x_right", "must exceed x_left"));
        }
        if (layer.x_left - x).abs() > 1e-12 * (1.0 + x.abs()) {
            return Err(Error::invalid("x_left", "layers must be contiguous"));
        }
        state = state_propagator(layer.k_inside, layer.x_right - layer.x_left) * state;
        x = layer.x_right;
    }
    Ok(state_to_plane_wave(k_outside, last.x_right) * state * plane_wave_to_state(k_outside, first.x_left))
}

/// Transfer matrix `(A₋, B₋) ↦ (A₊, B₊)` of a single slab.
pub fn interface_transfer(slab: &Slab1D) -> Result<Matrix2<Complex64>> {
    multilayer_transfer(&[slab.layer()], slab.wavevector_outside)
}

/// Reflection/transmission data of a left-incident unit wave, expressed as
/// the interior coefficients `(Γ₊, Γ₋)` used by the scattering module:
/// transmitted amplitude `e^{-iaq}Γ₊`, reflected amplitude `-e^{2ia₋q}Γ₋`.
/// `Γ₋` carries the sign of `(w² - q²)(1 - e^{2iaw})/…`, opposite to the
/// physical reflection coefficient.
pub fn gamma_from_transfer(m: &Matrix2<Complex64>, q: Complex64, a_minus: f64, a: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let m21 = m[(1, 0)];
    let m22 = m[(1, 1)];
    let g_plus = (i * q * a).exp() / m22;
    let g_minus = (-i * q * (2.0 * a_minus)).exp() * m21 / m22;
    (g_plus, g_minus)
}

/// Interior solution of a slab, referenced so that it stays bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteriorWave {
    /// `c1 e^{iw(x-x_l)} + c2 e^{-iw(x-x_r)}`
    Exponential {
        w: Complex64,
        x_left: f64,
        x_right: f64,
        c1: Complex64,
        c2: Complex64,
    },
    /// `c1 cos(w(x-x_l)) + c2 sin(w(x-x_l))/w`, used when `|w|(x_r-x_l)` is small
    Regular {
        w: Complex64,
        x_left: f64,
        c1: Complex64,
        c2: Complex64,
    },
}

/// Below this `|w| L` the interior uses the regular basis.
const REGULAR_BASIS_LIMIT: f64 = 1.0;

fn cos_sin_over(w: Complex64, d: f64) -> (Complex64, Complex64) {
    let m = state_propagator(w, d);
    (m[(0, 0)], m[(0, 1)])
}

impl InteriorWave {
    pub fn value(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            InteriorWave::Exponential {
                w,
                x_left,
                x_right,
                c1,
                c2,
            } => c1 * (i * w * (x - x_left)).exp() + c2 * (-i * w * (x - x_right)).exp(),
            InteriorWave::Regular { w, x_left, c1, c2 } => {
                let (cs, sn) = cos_sin_over(w, x - x_left);
                c1 * cs + c2 * sn
            }
        }
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            InteriorWave::Exponential {
                w,
                x_left,
                x_right,
                c1,
                c2,
            } => i * w * (c1 * (i * w * (x - x_left)).exp() - c2 * (-i * w * (x - x_right)).exp()),
            InteriorWave::Regular { w, x_left, c1, c2 } => {
                let (cs, sn) = cos_sin_over(w, x - x_left);
                -w * w * sn * c1 + cs * c2
            }
        }
    }
}

/// Outgoing amplitudes of a slab for given incoming ones, each referenced
/// to its own face: on the left `f e^{iq(x-x_l)} + r e^{-iq(x-x_l)}`, on the
/// right `t e^{iq(x-x_r)} + g e^{-iq(x-x_r)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabResponse {
    pub reflected_left: Complex64,
    pub transmitted_right: Complex64,
    pub interior: InteriorWave,
}

/// Solves the four continuity conditions directly for incoming amplitudes
/// `f` (from the left) and `g` (from the right). The interior basis is
/// bounded on the slab, so the solve stays well conditioned for strongly
/// evanescent interiors where transfer-matrix products overflow.
pub fn slab_response(slab: &Slab1D, f: Complex64, g: Complex64) -> Result<SlabResponse> {
    let q = slab.wavevector_outside;
    if q.norm() < ZERO_WAVEVECTOR {
        return Err(Error::SingularMatching);
    }
    if !(slab.x_right > slab.x_left) {
        return Err(Error::invalid("x_right", "must exceed x_left"));
    }
    let w = slab.wavevector_inside;
    let len = slab.x_right - slab.x_left;
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let regular = (w * len).norm() < REGULAR_BASIS_LIMIT;
    // (ψ, ψ') of the two interior basis functions at each face
    let (vl, dl, vr, dr) = if regular {
        let (cs, sn) = cos_sin_over(w, len);
        ([one, zero], [zero, one], [cs, sn], [-w * w * sn, cs])
    } else {
        let e = (i * w * len).exp();
        ([one, e], [i * w, -i * w * e], [e, one], [i * w * e, -i * w])
    };
    // unknowns (r, t, c1, c2)
    let m = Matrix4::new(
        -one,
        zero,
        vl[0],
        vl[1],
        i * q,
        zero,
        dl[0],
        dl[1],
        zero,
        -one,
        vr[0],
        vr[1],
        zero,
        -i * q,
        dr[0],
        dr[1],
    );
    let rhs = Vector4::new(f, i * q * f, g, -i * q * g);
    let sol = m.lu().solve(&rhs).ok_or(Error::SingularMatching)?;
    if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularMatching);
    }
    let interior = if regular {
        InteriorWave::Regular {
            w,
            x_left: slab.x_left,
            c1: sol[2],
            c2: sol[3],
        }
    } else {
        InteriorWave::Exponential {
            w,
            x_left: slab.x_left,
            x_right: slab.x_right,
            c1: sol[2],
            c2: sol[3],
        }
    };
    Ok(SlabResponse {
        reflected_left: sol[0],
        transmitted_right: sol[1],
        interior,
    })
}
