//! Interior S-matrix blocks and single-mode injection.

use num_complex::Complex64;

use super::coefficients::{denominator, per_mode_coefficients, ModeKind};
use crate::error::Result;
use crate::well::WaveguideSpec;

/// 2×2 interior S-matrix block of mode `n`, acting on `(A₋, B₊)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SBlock {
    pub n: usize,
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl SBlock {
    /// `S·(a_minus, b_plus)`.
    pub fn apply(&self, a_minus: Complex64, b_plus: Complex64) -> (Complex64, Complex64) {
        (
            self.s11 * a_minus + self.s12 * b_plus,
            self.s21 * a_minus + self.s22 * b_plus,
        )
    }
}

/// Multipliers for a wave injected in a single mode from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    /// `e^{-iaϖ}Γ₊_n`
    pub transmission: Complex64,
    /// `e^{2ia₋ϖ}Γ₋_n`
    pub reflection: Complex64,
}

/// `S` block of mode `n`:
/// `[[e^{-iaϖ}Γ₊, e^{-2ia₊ϖ}Γ₋], [e^{2ia₋ϖ}Γ₋, e^{-iaϖ}Γ₊]]`.
pub fn s_block(n: usize, k: f64, spec: &WaveguideSpec) -> Result<SBlock> {
    let mode = spec.mode(n, k);
    let c = per_mode_coefficients(&mode, k, spec)?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if spec.is_empty_guide() {
        return Ok(SBlock {
            n,
            s11: one,
            s12: zero,
            s21: zero,
            s22: one,
        });
    }
    let i = Complex64::i();
    let (w, vp) = (mode.w(), mode.varpi());
    let a = spec.a();
    let diag = if c.kind == ModeKind::Exceptional {
        (-i * a * vp).exp() * c.c_plus
    } else {
        // e^{-iaϖ}Γ₊ = 4ϖ e^{ia(w-ϖ)}/D with w - ϖ = -V0/(ϖ + w)
        let (d, _) = denominator(w, vp, spec.v0(), a);
        4.0 * vp * (-i * a * spec.v0() / (vp + w)).exp() / d
    };
    Ok(SBlock {
        n,
        s11: diag,
        s12: (-2.0 * i * spec.a_plus() * vp).exp() * c.c_minus,
        s21: (2.0 * i * spec.a_minus() * vp).exp() * c.c_minus,
        s22: diag,
    })
}

/// Blocks for modes `1..=modes`.
pub fn interior_s_matrix(k: f64, spec: &WaveguideSpec, modes: usize) -> Result<Vec<SBlock>> {
    (1..=modes).map(|n| s_block(n, k, spec)).collect()
}

/// Transmitted and reflected multipliers for left injection into mode `n`.
pub fn mode_injection(n: usize, k: f64, spec: &WaveguideSpec) -> Result<Injection> {
    let blk = s_block(n, k, spec)?;
    let (t, r) = blk.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    Ok(Injection {
        transmission: t,
        reflection: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_guide_exceptional_injection_is_transparent() {
        let b = 1.7;
        let s = WaveguideSpec::new(-2.0, 5.0, b, 0.0).unwrap();
        let inj = mode_injection(1, PI / b, &s).unwrap();
        assert_eq!(inj.transmission, c(1.0, 0.0));
        assert_eq!(inj.reflection, c(0.0, 0.0));
    }

    #[test]
    fn empty_guide_blocks_are_diagonal() {
        let s = WaveguideSpec::new(0.0, 3.0, PI, 0.0).unwrap();
        for blk in interior_s_matrix(2.5, &s, 10).unwrap() {
            assert_eq!(blk.s12, c(0.0, 0.0));
            assert_eq!(blk.s21, c(0.0, 0.0));
        }
    }

    #[test]
    fn exceptional_injection_multiplier() {
        let (b, v0, a_minus, a_plus) = (PI, 3.0, -0.5, 1.5);
        let k = 7f64.sqrt();
        let s = WaveguideSpec::new(a_minus, a_plus, b, v0).unwrap();
        let inj = mode_injection(2, k, &s).unwrap();
        let vp = s.mode(2, k).varpi();
        assert!((vp - c(3f64.sqrt(), 0.0)).norm() < 1e-12);
        let a = a_plus - a_minus;
        let i = Complex64::i();
        let den = 1.0 - i * a * vp / 2.0;
        let t = (-i * a * vp).exp() / den;
        let r = (i * a * vp / 2.0) / den * (2.0 * i * a_minus * vp).exp();
        assert!((inj.transmission - t).norm() < 1e-12);
        assert!((inj.reflection - r).norm() < 1e-12);
    }

    #[test]
    fn diagonal_entries_equal_and_match_coefficients() {
        let s = WaveguideSpec::new(-0.3, 1.9, PI, 1.0).unwrap();
        let k = 2.5;
        for blk in interior_s_matrix(k, &s, 6).unwrap() {
            assert_eq!(blk.s11, blk.s22);
            let m = s.mode(blk.n, k);
            let cf = per_mode_coefficients(&m, k, &s).unwrap();
            let want = (-Complex64::i() * s.a() * m.varpi()).exp() * cf.c_plus;
            assert!((blk.s11 - want).norm() <= 1e-12 * want.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn injection_agrees_with_block() {
        let s = WaveguideSpec::new(-0.3, 1.9, 2.0, -1.2).unwrap();
        let k = 2.2;
        let blocks = interior_s_matrix(k, &s, 5).unwrap();
        for blk in &blocks {
            let inj = mode_injection(blk.n, k, &s).unwrap();
            assert!((inj.transmission - blk.s11).norm() <= 1e-12);
            assert!((inj.reflection - blk.s21).norm() <= 1e-12);
        }
    }

    #[test]
    fn deep_evanescent_modes_do_not_overflow() {
        let s = WaveguideSpec::new(0.0, 10.0, 1.0, 2.0).unwrap();
        let blk = s_block(120, 1.5, &s).unwrap();
        assert!(blk.s11.norm().is_finite());
        assert!(blk.s11.norm() < 1.0);
    }

    #[test]
    fn grazing_block_errors() {
        let s = WaveguideSpec::new(0.0, 1.0, PI, 2.0).unwrap();
        assert_eq!(s_block(2, 2.0, &s).unwrap_err(), Error::GrazingMode { n: 2 });
    }
}
