//! Per-mode 2×2 reduction of the generator `H = ½ V ϖ⁻¹ K - ϖ σ₃` for a
//! basis in which `ϖ` and `W` are simultaneously diagonal.
//!
//! Conventions: `K = [[1, 1], [-1, -1]]`, `σ₃ = diag(1, -1)`, and the inner
//! product is conjugate-linear in its first slot.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::well::{ModeRecord, WaveguideSpec};

pub type C2 = Matrix2<Complex64>;
pub type V2 = Vector2<Complex64>;

/// `|ϖ| < GRAZING_REL·k` counts as a grazing mode.
pub const GRAZING_REL: f64 = 1e-12;
/// `|w| < EXCEPTIONAL_REL·k` counts as an exceptional point; rounding in
/// `k² - E_n` alone leaves `|w| ~ 1e-8·k` at a nominal exceptional `k`.
pub const EXCEPTIONAL_REL: f64 = 1e-6;
/// Below this `|z|`, `sin z / z` and `cos z` use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn k_matrix() -> C2 {
    C2::new(c(1.0), c(1.0), c(-1.0), c(-1.0))
}

pub fn sigma3() -> C2 {
    C2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// Rejects modes whose `ϖ⁻¹` would be needed but is undefined. With
/// `V0 = 0` no inverse appears and grazing modes are admissible.
pub(crate) fn check_grazing(mode: &ModeRecord, k: f64, v0: Complex64) -> Result<()> {
    if v0 != c(0.0) && mode.varpi().norm() < GRAZING_REL * k {
        return Err(Error::GrazingMode { n: mode.n });
    }
    Ok(())
}

/// `w²/ϖ`, written as `ϖ - V0/ϖ` so that it is exact for `V0 = 0`.
pub(crate) fn w2_over_varpi(varpi: Complex64, v0: Complex64) -> Complex64 {
    if v0 == c(0.0) {
        varpi
    } else {
        varpi - v0 / varpi
    }
}

/// `(cos z, sin z / z)` for `z = w·x`, returned as `(C, S)` with
/// `S = sin(wx)/w`; both are even in `w` so the branch of `w` is irrelevant.
pub(crate) fn cos_and_sinc(w: Complex64, x: f64) -> (Complex64, Complex64) {
    let z = w * x;
    if z.norm() < SERIES_CUTOFF {
        let z2 = z * z;
        let cos = c(1.0) - z2 / 2.0 + z2 * z2 / 24.0;
        let s = (c(1.0) - z2 / 6.0 + z2 * z2 / 120.0) * x;
        (cos, s)
    } else {
        (z.cos(), z.sin() / w)
    }
}

/// `H_n = (V0 / 2ϖ_n) K - ϖ_n σ₃`.
pub fn build_h_mode(mode: &ModeRecord, k: f64, v0: Complex64) -> Result<C2> {
    check_grazing(mode, k, v0)?;
    let vp = mode.varpi();
    let alpha = if v0 == c(0.0) { c(0.0) } else { v0 / (vp * 2.0) };
    Ok(k_matrix() * alpha - sigma3() * vp)
}

/// Closed-form `exp(-ixH_n) = C·I + (i/2)(w²S ϖ⁻¹ K + ϖ S Kᵀ)` with
/// `C = cos(w x)`, `S = sin(w x)/w`. Linear in `x` at an exceptional point.
pub fn propagator_mode(mode: &ModeRecord, x: f64, k: f64, v0: Complex64) -> Result<C2> {
    check_grazing(mode, k, v0)?;
    let vp = mode.varpi();
    let (cw, sw) = cos_and_sinc(mode.w(), x);
    let half_i = Complex64::new(0.0, 0.5);
    let kk = k_matrix();
    Ok(C2::identity() * cw + (kk * (w2_over_varpi(vp, v0) * sw) + kk.transpose() * (vp * sw)) * half_i)
}

/// Entries of the single-mode transfer matrix
/// `M = e^{-ia₊ϖσ₃} exp(-iaH) e^{ia₋ϖσ₃}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEntries {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferEntries {
    pub fn matrix(&self) -> C2 {
        C2::new(self.m11, self.m12, self.m21, self.m22)
    }

    pub fn determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }
}

/// Transfer entries from `𝒞± = (1 ± 1)C` and `𝒮± = i(w²S/ϖ ± ϖS)`:
/// `M11 = ½e^{-ia₊ϖ}(𝒞₊+𝒮₊)e^{ia₋ϖ}`, `M12 = ½e^{-ia₊ϖ}(𝒞₋+𝒮₋)e^{-ia₋ϖ}`,
/// `M21 = ½e^{ia₊ϖ}(𝒞₋-𝒮₋)e^{ia₋ϖ}`, `M22 = ½e^{ia₊ϖ}(𝒞₊-𝒮₊)e^{-ia₋ϖ}`.
pub fn transfer_entries_mode(mode: &ModeRecord, k: f64, spec: &WaveguideSpec) -> Result<TransferEntries> {
    let v0 = spec.v0();
    check_grazing(mode, k, v0)?;
    let vp = mode.varpi();
    let w = mode.w();
    let a = spec.a();
    let i = Complex64::i();
    let (am, ap) = (spec.a_minus(), spec.a_plus());
    let ep = |x: f64| (i * vp * x).exp();
    let (cw, sw) = cos_and_sinc(w, a);
    let s_minus = -i * v0 / vp * sw;
    let (m11, m22) = if (w * a).norm() < 0.5 {
        let s_plus = i * (w2_over_varpi(vp, v0) * sw + vp * sw);
        let c_plus = cw * 2.0;
        (
            ep(-ap) * (c_plus + s_plus) * ep(am) * 0.5,
            ep(ap) * (c_plus - s_plus) * ep(-am) * 0.5,
        )
    } else {
        // exponential form: cos ± i sin combinations cancel badly for
        // evanescent modes, so write them through e^{±iwa} directly with
        // ϖ - w = V0/(ϖ + w)
        let sum = vp + w;
        let diff = if v0 == c(0.0) { c(0.0) } else { v0 / sum };
        let den = w * vp * 4.0;
        let (s2, d2) = (sum * sum, diff * diff);
        (
            ((-i * a * diff).exp() * s2 - (-i * a * (w + vp)).exp() * d2) / den,
            ((i * a * diff).exp() * s2 - (i * a * (vp + w)).exp() * d2) / den,
        )
    };
    Ok(TransferEntries {
        m11,
        m12: ep(-ap) * s_minus * ep(-am) * 0.5,
        m21: ep(ap) * (-s_minus) * ep(am) * 0.5,
        m22,
    })
}

/// `Q = [[w-ϖ, w+ϖ], [w+ϖ, w-ϖ]]`, which satisfies `Q exp(-ixH) = e^{-ixwσ₃} Q`.
pub fn q_matrix(mode: &ModeRecord) -> C2 {
    let (w, vp) = (mode.w(), mode.varpi());
    C2::new(w - vp, w + vp, w + vp, w - vp)
}

fn frobenius(m: &C2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Q` together with the relative intertwining residual
/// `‖Q ϖ⁻¹ exp(-ixH) ϖ - e^{-ixwσ₃} Q‖` at `x`, divided by the larger of
/// the two norms (both grow like `e^{|Im w| x}`).
pub fn q_intertwiner_mode(mode: &ModeRecord, x: f64, k: f64, v0: Complex64) -> Result<(C2, f64)> {
    let q = q_matrix(mode);
    // ϖ is a scalar on the mode, so the conjugation by ϖ cancels
    let p = propagator_mode(mode, x, k, v0)?;
    let i = Complex64::i();
    let w = mode.w();
    let phase = C2::new((-i * w * x).exp(), c(0.0), c(0.0), (i * w * x).exp());
    let (lhs, rhs) = (q * p, phase * q);
    let r = frobenius(&(lhs - rhs));
    let scale = frobenius(&lhs).max(frobenius(&rhs));
    Ok((q, if scale > 0.0 { r / scale } else { r }))
}

/// Biorthonormal eigenvectors `Ψ±`, `Φ±` of `H` and `H†` on one mode.
///
/// For a diagonalisable block `H Ψ± = ±w Ψ±`; at an exceptional point the
/// plus pair holds the eigenvector and the minus pair the generalised one,
/// with `H Ψ⁻ = k Ψ⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthoPair {
    pub psi_plus: V2,
    pub psi_minus: V2,
    pub phi_plus: V2,
    pub phi_minus: V2,
}

impl BiorthoPair {
    /// `max |⟨Φ_μ|Ψ_ν⟩ - δ_μν|`.
    pub fn biorthonormality_residual(&self) -> f64 {
        let phis = [self.phi_plus, self.phi_minus];
        let psis = [self.psi_plus, self.psi_minus];
        let mut worst = 0.0f64;
        for (mu, phi) in phis.iter().enumerate() {
            for (nu, psi) in psis.iter().enumerate() {
                let target = if mu == nu { 1.0 } else { 0.0 };
                worst = worst.max((phi.dotc(psi) - target).norm());
            }
        }
        worst
    }

    /// `max |Σ_μ |Ψ_μ⟩⟨Φ_μ| - I|` entrywise.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.psi_plus * self.phi_plus.adjoint() + self.psi_minus * self.phi_minus.adjoint();
        (sum - C2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `Ψ± = (1/2k)(ϖ∓w, ϖ±w)`, `Φ± = (k/2)(ϖ⁻¹*∓w⁻¹*, ϖ⁻¹*±w⁻¹*)`.
pub fn biortho_eigensystem(mode: &ModeRecord, k: f64) -> Result<BiorthoPair> {
    let (w, vp) = (mode.w(), mode.varpi());
    if vp.norm() < GRAZING_REL * k {
        return Err(Error::GrazingMode { n: mode.n });
    }
    if w.norm() < EXCEPTIONAL_REL * k {
        return Err(Error::ExceptionalPoint { n: mode.n });
    }
    let s = 1.0 / (2.0 * k);
    let (iv, iw) = (vp.inv().conj(), w.inv().conj());
    let h = k / 2.0;
    Ok(BiorthoPair {
        psi_plus: V2::new((vp - w) * s, (vp + w) * s),
        psi_minus: V2::new((vp + w) * s, (vp - w) * s),
        phi_plus: V2::new((iv - iw) * h, (iv + iw) * h),
        phi_minus: V2::new((iv + iw) * h, (iv - iw) * h),
    })
}

/// Jordan chain at an exceptional point: `Ψ⁺ = (ϖ, ϖ)/2k`,
/// `Ψ⁻ = (-1, 1)/2`, `Φ⁺ = k(ϖ⁻¹*, ϖ⁻¹*)`, `Φ⁻ = (-1, 1)`.
///
/// Needs `ϖ ≠ 0`; at `V0 = 0` the block is `H = 0` and has no Jordan chain.
pub fn jordan_block_system(mode: &ModeRecord, k: f64) -> Result<BiorthoPair> {
    let (w, vp) = (mode.w(), mode.varpi());
    if w.norm() >= EXCEPTIONAL_REL * k {
        return Err(Error::NotExceptional {
            n: mode.n,
            w_abs: w.norm(),
        });
    }
    if vp.norm() < GRAZING_REL * k {
        return Err(Error::GrazingMode { n: mode.n });
    }
    let s = 1.0 / (2.0 * k);
    let iv = vp.inv().conj() * k;
    Ok(BiorthoPair {
        psi_plus: V2::new(vp * s, vp * s),
        psi_minus: V2::new(c(-0.5), c(0.5)),
        phi_plus: V2::new(iv, iv),
        phi_minus: V2::new(c(-1.0), c(1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_expm;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn max_abs(m: &C2) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn expm2(h: &C2, x: f64) -> C2 {
        let d = DMatrix::from_iterator(2, 2, h.iter().copied());
        let e = dense_expm(&d, Complex64::new(0.0, -x)).unwrap();
        C2::from_iterator(e.iter().copied())
    }

    fn guide(v0: f64) -> WaveguideSpec {
        WaveguideSpec::new(-0.5, 1.5, PI, v0).unwrap()
    }

    #[test]
    fn empty_guide_h_is_diagonal() {
        let s = guide(0.0);
        let m = s.mode(1, 2.5);
        let h = build_h_mode(&m, 2.5, s.v0()).unwrap();
        let vp = m.varpi();
        assert_eq!(h, C2::new(-vp, c(0.0), c(0.0), vp));
    }

    #[test]
    fn h_eigenvalues_are_plus_minus_w() {
        let s = guide(1.0);
        let m = s.mode(2, 2.5);
        let h = build_h_mode(&m, 2.5, s.v0()).unwrap();
        assert!((h.trace()).norm() < 1e-15);
        // eigenvalues ±sqrt(-det H)
        let lam = (-h.determinant()).sqrt();
        assert!((lam.norm() - 1.118_033_988_749_895).abs() < 1e-12);
        assert!((lam - m.w()).norm() < 1e-12 || (lam + m.w()).norm() < 1e-12);
    }

    #[test]
    fn exceptional_h_is_nilpotent_rank_one() {
        let s = guide(1.0);
        let k = 5f64.sqrt();
        let m = s.mode(2, k);
        let h = build_h_mode(&m, k, s.v0()).unwrap();
        assert!(max_abs(&(h * h)) <= 1e-10 * max_abs(&h).powi(2));
        assert!(h.determinant().norm() < 1e-12);
        assert!(max_abs(&h) > 0.1);
    }

    #[test]
    fn grazing_is_rejected_only_with_potential() {
        let m = guide(1.0).mode(3, 3.0);
        assert!(matches!(
            build_h_mode(&m, 3.0, c(1.0)),
            Err(Error::GrazingMode { n: 3 })
        ));
        assert!(propagator_mode(&m, 1.0, 3.0, c(1.0)).is_err());
        let m0 = guide(0.0).mode(3, 3.0);
        assert_eq!(propagator_mode(&m0, 2.0, 3.0, c(0.0)).unwrap(), C2::identity());
    }

    #[test]
    fn propagator_examples() {
        let s = guide(1.0);
        let m = s.mode(1, 2.5);
        assert_eq!(propagator_mode(&m, 0.0, 2.5, s.v0()).unwrap(), C2::identity());
        let e = guide(0.0);
        let m = e.mode(2, 2.5);
        let x = 1.7;
        let p = propagator_mode(&m, x, 2.5, e.v0()).unwrap();
        let i = Complex64::i();
        let vp = m.varpi();
        let expect = C2::new((i * vp * x).exp(), c(0.0), c(0.0), (-i * vp * x).exp());
        assert!(max_abs(&(p - expect)) < 1e-14);
    }

    #[test]
    fn propagator_at_exceptional_point_is_linear() {
        let s = guide(1.0);
        let k = 5f64.sqrt();
        let m = s.mode(2, k);
        for &x in &[0.3, 2.0, 50.0] {
            let p = propagator_mode(&m, x, k, s.v0()).unwrap();
            let expect = C2::identity() + k_matrix().transpose() * (Complex64::new(0.0, x / 2.0) * m.varpi());
            assert!(max_abs(&(p - expect)) < 1e-12 * (1.0 + x));
            let j = jordan_block_system(&m, k).unwrap();
            let alt = C2::identity() - j.psi_plus * j.phi_minus.adjoint() * Complex64::new(0.0, k * x);
            assert!(max_abs(&(p - alt)) < 1e-12 * (1.0 + x));
        }
    }

    #[test]
    fn propagator_matches_dense_exponential() {
        for &(v0, k, n) in &[(1.0, 2.5, 1), (1.0, 2.5, 4), (-2.0, 1.3, 2), (3.0, 2.2, 1)] {
            let s = guide(v0);
            let m = s.mode(n, k);
            let h = build_h_mode(&m, k, s.v0()).unwrap();
            for &x in &[0.2, 2.0, 6.0] {
                let p = propagator_mode(&m, x, k, s.v0()).unwrap();
                let e = expm2(&h, x);
                assert!(max_abs(&(p - e)) <= 1e-10 * max_abs(&e), "{v0} {k} {n} {x}");
            }
        }
    }

    #[test]
    fn propagator_is_a_group() {
        let s = WaveguideSpec::with_complex_v0(0.0, 1.0, 2.0, Complex64::new(1.5, 0.4)).unwrap();
        let m = s.mode(1, 2.4);
        let p = |x| propagator_mode(&m, x, 2.4, s.v0()).unwrap();
        assert!(max_abs(&(p(0.7) * p(1.9) - p(2.6))) < 1e-12);
    }

    #[test]
    fn biorthonormal_pairs() {
        let s = guide(0.0);
        let k = 2.5;
        let m = s.mode(1, k);
        let b = biortho_eigensystem(&m, k).unwrap();
        assert!(b.biorthonormality_residual() < 1e-14);
        assert!(b.completeness_residual() < 1e-14);
        let h = build_h_mode(&m, k, s.v0()).unwrap();
        assert!((h * b.psi_plus - b.psi_plus * m.w()).norm() < 1e-12);
        let s = guide(1.7);
        for n in 1..6 {
            let m = s.mode(n, k);
            let b = biortho_eigensystem(&m, k).unwrap();
            let h = build_h_mode(&m, k, s.v0()).unwrap();
            let w = m.w();
            assert!((h * b.psi_plus - b.psi_plus * w).norm() < 1e-12);
            assert!((h * b.psi_minus + b.psi_minus * w).norm() < 1e-12);
            let ha = h.adjoint();
            assert!((ha * b.phi_plus - b.phi_plus * w.conj()).norm() < 1e-12);
            assert!((ha * b.phi_minus + b.phi_minus * w.conj()).norm() < 1e-12);
            assert!(b.biorthonormality_residual() < 1e-12);
            assert!(b.completeness_residual() < 1e-12);
        }
    }

    #[test]
    fn biortho_rejects_exceptional_point() {
        let s = guide(1.0);
        let m = s.mode(2, 5f64.sqrt());
        assert!(matches!(
            biortho_eigensystem(&m, 5f64.sqrt()),
            Err(Error::ExceptionalPoint { n: 2 })
        ));
    }

    #[test]
    fn jordan_chain() {
        let s = guide(1.0);
        let k = 5f64.sqrt();
        let m = s.mode(2, k);
        let j = jordan_block_system(&m, k).unwrap();
        let h = build_h_mode(&m, k, s.v0()).unwrap();
        assert!((h * j.psi_plus).norm() < 1e-12);
        assert!((h * j.psi_minus - j.psi_plus * c(k)).norm() < 1e-12);
        assert!((h.adjoint() * j.phi_minus).norm() < 1e-12);
        assert!((h.adjoint() * j.phi_plus - j.phi_minus * c(k)).norm() < 1e-12);
        assert!((j.phi_plus.dotc(&j.psi_plus) - 1.0).norm() < 1e-15);
        assert!(j.biorthonormality_residual() < 1e-12);
        assert!(j.completeness_residual() < 1e-12);
        assert!(matches!(
            jordan_block_system(&s.mode(1, k), k),
            Err(Error::NotExceptional { .. })
        ));
    }

    #[test]
    fn transfer_entries_empty_guide() {
        let s = guide(0.0);
        let m = s.mode(1, 2.5);
        let t = transfer_entries_mode(&m, 2.5, &s).unwrap();
        assert_eq!(t.m12, c(0.0));
        assert_eq!(t.m21, c(0.0));
        assert!(((t.m11 * t.m22).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn transfer_entries_equal_phase_conjugated_propagator() {
        let s = guide(1.3);
        let k = 2.5;
        for n in 1..5 {
            let m = s.mode(n, k);
            let t = transfer_entries_mode(&m, k, &s).unwrap();
            let i = Complex64::i();
            let vp = m.varpi();
            let l = C2::new(
                (-i * vp * s.a_plus()).exp(),
                c(0.0),
                c(0.0),
                (i * vp * s.a_plus()).exp(),
            );
            let r = C2::new(
                (i * vp * s.a_minus()).exp(),
                c(0.0),
                c(0.0),
                (-i * vp * s.a_minus()).exp(),
            );
            let direct = l * propagator_mode(&m, s.a(), k, s.v0()).unwrap() * r;
            assert!(max_abs(&(t.matrix() - direct)) < 1e-12 * max_abs(&direct));
            assert!((t.determinant() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn q_examples() {
        let s = guide(0.0);
        let m = s.mode(1, 2.5);
        let vp = m.varpi();
        assert_eq!(q_matrix(&m), C2::new(c(0.0), vp * 2.0, vp * 2.0, c(0.0)));
        let s = guide(1.0);
        let k = 5f64.sqrt();
        let m = s.mode(2, k);
        let q = q_matrix(&m);
        let vp = m.varpi();
        // k² - E rounds to ~1e-15 here, leaving |w| ~ 3e-8
        assert!(max_abs(&(q - C2::new(-vp, vp, vp, -vp))) < 1e-7);
        assert!(q.determinant().norm() < 1e-6);
        let s = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let (_, r) = q_intertwiner_mode(&s.mode(1, 2.5), s.a(), 2.5, s.v0()).unwrap();
        assert!(r <= 1e-10);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unit_determinant_and_intertwining(
                k in 0.3f64..6.0, b in 1.0f64..5.0, a in 0.5f64..10.0, v0 in -3.0f64..8.0, n in 1usize..12,
            ) {
                let s = WaveguideSpec::new(-0.3 * a, 0.7 * a, b, v0).unwrap();
                let m = s.mode(n, k);
                prop_assume!(m.varpi().norm() > 1e-3 * k);
                let t = transfer_entries_mode(&m, k, &s).unwrap();
                let scale = t.m11.norm() * t.m22.norm() + t.m12.norm() * t.m21.norm();
                prop_assert!((t.determinant() - 1.0).norm() <= 1e-10 * scale.max(1.0));
                let (_, r) = q_intertwiner_mode(&m, a, k, s.v0()).unwrap();
                let growth = (m.w().im.abs() * a).exp();
                prop_assert!(r <= 1e-10 * growth.max(1.0), "r = {}", r);
            }
        }
    }
}
