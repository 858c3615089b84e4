//! Per-mode Fabry–Pérot coefficients of the well: `r±` for propagating
//! modes, `s±` for evanescent ones, their exceptional-point limits and the
//! large-length reflection factor `t_n`.

use num_complex::Complex64;

use crate::engine::mode::check_grazing;
use crate::error::Result;
use crate::well::{ModeRecord, WaveguideSpec};

/// Below this `|a·w_n|` the exceptional-point limits replace the general
/// formulas.
pub const EP_LIMIT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Propagating,
    Evanescent,
    Exceptional,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Propagating => "propagating",
            ModeKind::Evanescent => "evanescent",
            ModeKind::Exceptional => "exceptional",
        }
    }
}

/// Diagonal entries `Γ±_n = ⟨φ_n|Γ±|φ_n⟩` of the interior kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerModeCoefficients {
    pub n: usize,
    pub kind: ModeKind,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// `(w - ϖ)/(w + ϖ)`, the `a → ∞` limit of `s⁻_n`.
    pub t_n: Complex64,
}

/// `e^z - 1` without cancellation for small `|z|`.
fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let h = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * h * h, (em1 + 1.0) * s)
}

/// `(e^z - 1)/z`, equal to 1 at `z = 0`.
pub(crate) fn expm1_over(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0
    } else {
        expm1(z) / z
    }
}

/// `(D, E(2iaw))` of the unified form below.
pub(crate) fn denominator(w: Complex64, vp: Complex64, v0: Complex64, a: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let diff = v0 / (vp + w);
    let e = expm1_over(2.0 * i * a * w);
    (4.0 * vp - diff * diff * 2.0 * i * a * e, e)
}

/// Fabry–Pérot coefficients of mode `n`.
///
/// Both branches of the textbook formulas are evaluated through one form
/// written with the branched `w_n` (Im ≥ 0):
/// `Γ₊ = 4ϖ e^{iaw}/D`, `Γ₋ = 2iaV0 E(2iaw)/D`, `D = 4ϖ - (ϖ-w)² 2ia E(2iaw)`
/// with `E(z) = (e^z - 1)/z` and `ϖ - w = V0/(ϖ + w)`. This is exact
/// algebra on the usual expressions, has no `0/0` at `w = 0` and no overflow
/// for evanescent modes. Strongly decaying modes use the equivalent
/// `Γ₋ = t_n + 4V0ϖw e^{2iaw}/(S(S - (ϖ-w)² e^{2iaw}))`, `S = (ϖ+w)²`.
pub fn per_mode_coefficients(mode: &ModeRecord, k: f64, spec: &WaveguideSpec) -> Result<PerModeCoefficients> {
    let v0 = spec.v0();
    let a = spec.a();
    let i = Complex64::i();
    let (w, vp) = (mode.w(), mode.varpi());
    let kind = if (a * w).norm() < EP_LIMIT_THRESHOLD {
        ModeKind::Exceptional
    } else if mode.n <= spec.n_star(k) && w.re >= w.im {
        ModeKind::Propagating
    } else {
        ModeKind::Evanescent
    };
    let zero = Complex64::new(0.0, 0.0);
    if spec.is_empty_guide() {
        return Ok(PerModeCoefficients {
            n: mode.n,
            kind,
            c_plus: (i * a * vp).exp(),
            c_minus: zero,
            t_n: zero,
        });
    }
    check_grazing(mode, k, v0)?;
    let sum = vp + w;
    let t_n = -v0 / (sum * sum);
    if kind == ModeKind::Exceptional {
        let half = i * a * vp / 2.0;
        let c_plus = 1.0 / (1.0 - half);
        return Ok(PerModeCoefficients {
            n: mode.n,
            kind,
            c_plus,
            c_minus: half * c_plus,
            t_n,
        });
    }
    if (a * w).im > 1.0 {
        // decaying interior: write Γ₋ as t_n plus its exponentially small
        // correction, so long-guide limits are reproduced to the last bit
        let x = (2.0 * i * a * w).exp();
        let diff = v0 / sum;
        let den = sum * sum - diff * diff * x;
        return Ok(PerModeCoefficients {
            n: mode.n,
            kind,
            c_plus: 4.0 * w * vp * (i * a * w).exp() / den,
            c_minus: t_n + v0 * x * 4.0 * vp * w / (sum * sum * den),
            t_n,
        });
    }
    let (d, e) = denominator(w, vp, v0, a);
    Ok(PerModeCoefficients {
        n: mode.n,
        kind,
        c_plus: 4.0 * vp * (i * a * w).exp() / d,
        c_minus: 2.0 * i * a * v0 * e / d,
        t_n,
    })
}

/// Textbook `r±_n` for a propagating mode, used as a cross-check.
#[cfg(test)]
pub(crate) fn textbook_r(mode: &ModeRecord, a: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let (w, vp) = (mode.w(), mode.varpi());
    let e2 = (2.0 * i * a * w).exp();
    let den = (vp + w) * (vp + w) - (vp - w) * (vp - w) * e2;
    (
        4.0 * w * vp * (i * a * w).exp() / den,
        (w * w - vp * vp) * (1.0 - e2) / den,
    )
}
