//! Truncated operators on `ℂ² ⊗ span{φ_1..φ_N}` for bases in which `ϖ` is a
//! dense matrix.
//!
//! Ordering: index `2n + s` (mode-major blocks of two, `s = 0` the upper
//! component), so a product operator `A ⊗ B` is `A.kronecker(B)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::ModeBasisSpec;
use super::mode::{cos_and_sinc, k_matrix, sigma3};
use crate::dispersion::w_mode;
use crate::error::{Error, Result};
use crate::well::WaveguideSpec;

/// Pivot ratio below which an LU factorisation is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A finite section of an operator. `components` is 1 for operators on the
/// mode space alone and 2 for operators on `ℂ² ⊗` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub modes: usize,
    pub components: usize,
    pub matrix: CMat,
}

impl TruncatedOperator {
    fn scalar(matrix: CMat) -> Self {
        Self {
            modes: matrix.nrows(),
            components: 1,
            matrix,
        }
    }

    fn spinor(matrix: CMat) -> Self {
        Self {
            modes: matrix.nrows() / 2,
            components: 2,
            matrix,
        }
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }
}

fn small(m: &nalgebra::Matrix2<Complex64>) -> CMat {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `ϖ` and `W` on the first `N` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGenerator {
    pub varpi: CMat,
    pub w: DVector<Complex64>,
    varpi_inv: CMat,
}

impl DenseGenerator {
    /// Builds `ϖ_{mn} = ⟨φ_m|ϖ|φ_n⟩` (elements computed in parallel, upper
    /// triangle mirrored; `ϖ` is complex symmetric for real `φ_n`) and
    /// `W = diag(w_n)`.
    pub fn new(basis: &dyn ModeBasisSpec, k: f64, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("modes", "must be positive"));
        }
        let pairs: Vec<(usize, usize)> = (0..modes).flat_map(|i| (i..modes).map(move |j| (i, j))).collect();
        let values: Vec<Result<Complex64>> = pairs
            .par_iter()
            .map(|&(i, j)| basis.varpi_matrix_element(i + 1, j + 1, k))
            .collect();
        let mut varpi = CMat::zeros(modes, modes);
        for (&(i, j), v) in pairs.iter().zip(values) {
            let v = v?;
            varpi[(i, j)] = v;
            varpi[(j, i)] = v;
        }
        let w = DVector::from_fn(modes, |i, _| w_mode(basis.energy(i + 1), k).value());
        let varpi_inv = invert(&varpi)?;
        Ok(Self { varpi, w, varpi_inv })
    }

    pub fn modes(&self) -> usize {
        self.w.len()
    }

    fn diag(&self, f: impl Fn(Complex64) -> Complex64) -> CMat {
        CMat::from_diagonal(&self.w.map(f))
    }

    /// `V = ϖ² - W²`, the potential implied by the truncated `ϖ` and `W`.
    pub fn potential(&self) -> CMat {
        &self.varpi * &self.varpi - self.diag(|w| w * w)
    }

    /// `H = ½ V ϖ⁻¹ ⊗ K - ϖ ⊗ σ₃`.
    pub fn h(&self) -> TruncatedOperator {
        let v = self.potential() * &self.varpi_inv * c(0.5);
        let h = v.kronecker(&small(&k_matrix())) - self.varpi.kronecker(&small(&sigma3()));
        TruncatedOperator::spinor(h)
    }

    /// Closed-form exponential
    /// `½[ϖCϖ⁻¹ ⊗ (I+σ₁) + C ⊗ (I-σ₁) + i(W²Sϖ⁻¹ ⊗ K + ϖS ⊗ Kᵀ)]`
    /// with `C = cos(xW)`, `S = sin(xW)/W`.
    pub fn propagator(&self, x: f64) -> TruncatedOperator {
        let cs: Vec<(Complex64, Complex64)> = self.w.iter().map(|&w| cos_and_sinc(w, x)).collect();
        let cm = CMat::from_diagonal(&DVector::from_iterator(cs.len(), cs.iter().map(|p| p.0)));
        let sm = CMat::from_diagonal(&DVector::from_iterator(cs.len(), cs.iter().map(|p| p.1)));
        let w2 = self.diag(|w| w * w);
        let id = small(&nalgebra::Matrix2::identity());
        let s1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let kk = small(&k_matrix());
        let kt = kk.transpose();
        let t1 = (&self.varpi * &cm * &self.varpi_inv).kronecker(&(&id + &s1));
        let t2 = cm.kronecker(&(&id - &s1));
        let t3 = (&w2 * &sm * &self.varpi_inv).kronecker(&kk) + (&self.varpi * &sm).kronecker(&kt);
        TruncatedOperator::spinor((t1 + t2 + t3 * Complex64::i()) * c(0.5))
    }

    /// `Q = (W - ϖ) ⊗ I + (W + ϖ) ⊗ σ₁`.
    pub fn q(&self) -> TruncatedOperator {
        let wd = self.diag(|w| w);
        let id = small(&nalgebra::Matrix2::identity());
        let s1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        TruncatedOperator::spinor((&wd - &self.varpi).kronecker(&id) + (&wd + &self.varpi).kronecker(&s1))
    }

    /// `max|Q ϖ⁻¹ P ϖ - e^{-ixWσ₃} Q|` relative to the larger side, for a given
    /// propagator `P`.
    pub fn intertwining_residual(&self, p: &TruncatedOperator, x: f64) -> f64 {
        let q = self.q().matrix;
        let id = small(&nalgebra::Matrix2::identity());
        let vp = self.varpi.kronecker(&id);
        let vpi = self.varpi_inv.kronecker(&id);
        let i = Complex64::i();
        let n = self.modes();
        let phase = CMat::from_fn(2 * n, 2 * n, |r, col| {
            if r != col {
                return c(0.0);
            }
            let w = self.w[r / 2];
            if r % 2 == 0 {
                (-i * w * x).exp()
            } else {
                (i * w * x).exp()
            }
        });
        let lhs = &q * vpi * &p.matrix * vp;
        let rhs = phase * &q;
        max_abs(&(&lhs - &rhs)) / max_abs(&lhs).max(max_abs(&rhs))
    }

    /// `Γ± = ½(Ω₁₋⁻¹Ω₁₊ ± Ω₂₋⁻¹Ω₂₊)` with
    /// `Ω₁± = W cos(aW/2) ± i sin(aW/2) ϖ` and `Ω₂± = cos(aW/2) ϖ ± i W sin(aW/2)`.
    ///
    /// `Ω₁±` enter through `W⁻¹Ω₁± = cos(aW/2) ± i(a/2) sinc(aW/2) ϖ`, which has
    /// the same quotient and stays regular where some `w_n = 0`.
    pub fn gamma(&self, a: f64) -> Result<(TruncatedOperator, TruncatedOperator)> {
        // each row of Ω±, and so of both sides of Ω₋ X = Ω₊, is scaled by
        // e^{-|Im(aw_n/2)|}; the quotient is unchanged and nothing overflows
        let cs: Vec<(Complex64, Complex64)> = self.w.iter().map(|&w| scaled_cos_and_sinc(w, 0.5 * a)).collect();
        let cos = CMat::from_diagonal(&DVector::from_iterator(cs.len(), cs.iter().map(|p| p.0)));
        let sinc_half = CMat::from_diagonal(&DVector::from_iterator(cs.len(), cs.iter().map(|p| p.1)));
        let w = self.diag(|w| w);
        let i = Complex64::i();
        let s_vp = &sinc_half * &self.varpi * i;
        let o1p = &cos + &s_vp;
        let o1m = &cos - &s_vp;
        let sin = &w * &sinc_half;
        let w_sin = &w * &sin * i;
        let c_vp = &cos * &self.varpi;
        let o2p = &c_vp + &w_sin;
        let o2m = &c_vp - &w_sin;
        let r1 = solve(o1m, &o1p)?;
        let r2 = solve(o2m, &o2p)?;
        let gp = (&r1 + &r2) * c(0.5);
        let gm = (&r1 - &r2) * c(0.5);
        Ok((TruncatedOperator::scalar(gp), TruncatedOperator::scalar(gm)))
    }
}

/// `(cos(wx), sin(wx)/w)` multiplied by `e^{-|Im(wx)|}`.
fn scaled_cos_and_sinc(w: Complex64, x: f64) -> (Complex64, Complex64) {
    let z = w * x;
    let damp = z.im.abs();
    if damp < 1.0 {
        let (cw, sw) = cos_and_sinc(w, x);
        let s = (-damp).exp();
        return (cw * s, sw * s);
    }
    let i = Complex64::i();
    let ep = (i * z - damp).exp();
    let em = (-i * z - damp).exp();
    ((ep + em) * 0.5, (ep - em) / (w * 2.0 * i))
}

fn lu_is_singular(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> bool {
    let u = lu.u();
    let piv: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let hi = piv.iter().copied().fold(0.0, f64::max);
    let lo = piv.iter().copied().fold(f64::INFINITY, f64::min);
    !(hi > 0.0) || lo < SINGULAR_PIVOT_RATIO * hi
}

fn solve(a: CMat, b: &CMat) -> Result<CMat> {
    let lu = a.lu();
    if lu_is_singular(&lu) {
        return Err(Error::InternalResonance);
    }
    lu.solve(b).ok_or(Error::InternalResonance)
}

fn invert(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let lu = a.clone().lu();
    if lu_is_singular(&lu) {
        return Err(Error::Domain(
            "ϖ is singular on the retained modes (grazing mode)".into(),
        ));
    }
    lu.solve(&CMat::identity(n, n))
        .ok_or_else(|| Error::Domain("ϖ is singular on the retained modes (grazing mode)".into()))
}

/// Default truncation `max(4n⋆, n⋆ + 32)`.
pub fn default_truncation(n_star: usize) -> usize {
    (4 * n_star).max(n_star + 32)
}

/// `Γ±` of the general assembly on the first `modes` basis functions.
pub fn assemble_gamma_general(
    basis: &dyn ModeBasisSpec,
    k: f64,
    spec: &WaveguideSpec,
    modes: usize,
) -> Result<(TruncatedOperator, TruncatedOperator)> {
    DenseGenerator::new(basis, k, modes)?.gamma(spec.a())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::basis::{CompressedWell, InfiniteWell};
    use crate::engine::mode::propagator_mode;
    use crate::oracle::dense_expm;
    use std::f64::consts::PI;

    #[test]
    fn well_assembly_is_diagonal_and_matches_per_mode_propagator() {
        let basis = InfiniteWell { b: PI, v0: c(1.0) };
        let spec = WaveguideSpec::new(0.0, 2.0, PI, 1.0).unwrap();
        let g = DenseGenerator::new(&basis, 2.5, 8).unwrap();
        let p = g.propagator(1.3);
        for n in 0..8 {
            let m = spec.mode(n + 1, 2.5);
            let pm = propagator_mode(&m, 1.3, 2.5, spec.v0()).unwrap();
            for s in 0..2 {
                for t in 0..2 {
                    assert!((p.matrix[(2 * n + s, 2 * n + t)] - pm[(s, t)]).norm() < 1e-12 * (1.0 + pm[(s, t)].norm()));
                }
            }
        }
        let (gp, gm) = g.gamma(spec.a()).unwrap();
        assert!(gp.max_off_diagonal() < 1e-12);
        assert!(gm.max_off_diagonal() < 1e-12);
    }

    #[test]
    fn empty_guide_gamma() {
        let basis = InfiniteWell { b: PI, v0: c(0.0) };
        let g = DenseGenerator::new(&basis, 2.5, 6).unwrap();
        let (gp, gm) = g.gamma(3.0).unwrap();
        for n in 0..6 {
            let vp = crate::dispersion::varpi_mode(n + 1, 2.5, PI).value();
            assert!((gp.matrix[(n, n)] - (Complex64::i() * vp * 3.0).exp()).norm() < 1e-12);
        }
        assert!(max_abs(&gm.matrix) < 1e-12);
    }

    #[test]
    fn gamma_is_regular_at_exceptional_point() {
        let basis = InfiniteWell { b: PI, v0: c(1.0) };
        let g = DenseGenerator::new(&basis, 5f64.sqrt(), 6).unwrap();
        let (gp, gm) = g.gamma(2.0).unwrap();
        let vp = g.varpi[(1, 1)];
        let rp = c(1.0) / (c(1.0) - Complex64::i() * vp);
        assert!((gp.matrix[(1, 1)] - rp).norm() < 1e-12);
        assert!((gm.matrix[(1, 1)] - (rp - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn gamma_survives_strong_evanescent_decay() {
        let basis = InfiniteWell { b: 0.5, v0: c(2.0) };
        let g = DenseGenerator::new(&basis, 1.0, 40).unwrap();
        let (gp, gm) = g.gamma(300.0).unwrap();
        assert!(gp.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        // e^{-a|w|} underflows; what remains is rounding noise
        assert!(max_abs(&gp.matrix) < 1e-14);
        let w = g.w[0];
        let vp = g.varpi[(0, 0)];
        let t1 = (w - vp) / (w + vp);
        assert!((gm.matrix[(0, 0)] - t1).norm() < 1e-12);
    }

    #[test]
    fn compressed_basis_closed_form_and_intertwining() {
        let basis = CompressedWell::new(PI, c(1.0));
        let g = DenseGenerator::new(&basis, 2.5, 12).unwrap();
        assert!(g.q().max_off_diagonal() > 1e-3);
        for &x in &[0.1, 0.4] {
            let p = g.propagator(x);
            let e = dense_expm(&g.h().matrix, Complex64::new(0.0, -x)).unwrap();
            let rel = max_abs(&(&p.matrix - &e)) / max_abs(&e);
            assert!(rel < 1e-6, "x={x}: {rel}");
            assert!(g.intertwining_residual(&p, x) < 1e-6);
        }
    }
}
