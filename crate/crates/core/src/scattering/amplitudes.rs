//! Reflection and transmission amplitudes, the end-face (wall) terms and
//! the asymptotic coefficient functions.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::{KernelOptions, ModeTable};
use crate::dispersion::{varpi, Incidence, Side, MIN_ABS_COS_THETA};
use crate::engine::dense::default_truncation;
use crate::error::{Error, Result};
use crate::well::{lambda_kernel, WaveguideSpec};

/// Default number of angles per sector.
pub const DEFAULT_THETA_POINTS: usize = 721;
/// Default half-width, in degrees, of the excluded bands around `±π/2`.
pub const DEFAULT_EXCLUSION_DEG: f64 = 0.5;

fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

/// Coefficient of `√(2π) δ(θ - θ_sing)` in an amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaTerm {
    pub theta: f64,
    pub coeff: Complex64,
}

/// An amplitude split into a delta part and a smooth part sampled on `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeWithDelta {
    pub delta_coeff: Complex64,
    pub theta_sing: f64,
    pub theta: Vec<f64>,
    pub smooth: Vec<Complex64>,
}

impl AmplitudeWithDelta {
    pub fn delta(&self) -> DeltaTerm {
        DeltaTerm {
            theta: self.theta_sing,
            coeff: self.delta_coeff,
        }
    }
}

/// Reflection and transmission amplitudes on a shared grid: `t.theta[j]` is
/// a transmission-sector angle and `r.theta[j] = π - t.theta[j]` its mirror,
/// both with transverse momentum `k sin θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitudes {
    pub r: AmplitudeWithDelta,
    pub t: AmplitudeWithDelta,
    /// Largest number of modes any kernel evaluation needed.
    pub modes_used: usize,
}

/// Contribution of the guide's end face to reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallTerm {
    /// `∓k cosθ0 e^{2ia∓ k cosθ0} Λ(k sinθ, k sinθ0)/2π` (left: `-`, `a₋`;
    /// right: `+`, `a₊`). Its contribution to `R` is `-i√(2π)` times this.
    pub smooth: Complex64,
    /// `e^{2ia∓ k cosθ0}`.
    pub phase: Complex64,
    /// Specular delta of `R` at `π - θ0`.
    pub delta: DeltaTerm,
}

/// Whether `theta` lies in the sector of incidence angles for `side`.
fn in_sector(theta: f64, side: Side) -> bool {
    let c = theta.cos();
    c.abs() >= MIN_ABS_COS_THETA && ((side == Side::Left) == (c > 0.0))
}

/// Mirror angle `π - θ`, kept in `(-π/2, 3π/2]`.
pub fn mirror_angle(theta: f64) -> f64 {
    let m = PI - theta;
    if m <= -FRAC_PI_2 {
        m + 2.0 * PI
    } else if m > 3.0 * FRAC_PI_2 {
        m - 2.0 * PI
    } else {
        m
    }
}

/// Evenly spaced angles across the sector facing `side`'s opposite, i.e.
/// where transmitted waves go, with `exclusion_deg` bands removed at the
/// sector edges.
pub fn transmission_grid(side: Side, points: usize, exclusion_deg: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::invalid("theta_points", "need at least 2"));
    }
    if !(exclusion_deg > 0.0 && exclusion_deg < 90.0) {
        return Err(Error::invalid("exclusion_band_deg", "must lie in (0, 90)"));
    }
    let ex = exclusion_deg.to_radians();
    let centre = match side {
        Side::Left => 0.0,
        Side::Right => PI,
    };
    let (lo, hi) = (centre - FRAC_PI_2 + ex, centre + FRAC_PI_2 - ex);
    Ok((0..points)
        .map(|j| lo + (hi - lo) * j as f64 / (points - 1) as f64)
        .collect())
}

/// Wall contribution at the reflection-sector angle `theta`.
pub fn wall_terms(theta: f64, incidence: &Incidence, spec: &WaveguideSpec) -> Result<WallTerm> {
    let reflect_side = match incidence.side() {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    // reflected waves travel back towards the source
    if !in_sector(theta, reflect_side) {
        return Err(Error::Domain(format!(
            "θ = {theta} is not in the reflection sector for {} incidence",
            incidence.side().as_str()
        )));
    }
    let k = incidence.k();
    let kc0 = incidence.k_cos();
    let (sign, face) = match incidence.side() {
        Side::Left => (-1.0, spec.a_minus()),
        Side::Right => (1.0, spec.a_plus()),
    };
    let phase = Complex64::from_polar(1.0, 2.0 * face * kc0);
    let lam = lambda_kernel(k * theta.sin(), incidence.p0(), spec.b());
    Ok(WallTerm {
        smooth: sign * kc0 * phase * lam / (2.0 * PI),
        phase,
        delta: DeltaTerm {
            theta: mirror_angle(incidence.theta0()),
            coeff: -Complex64::i() * phase,
        },
    })
}

/// `R` and `T` over `theta_grid` (transmission-sector angles).
pub fn amplitudes(
    incidence: &Incidence,
    spec: &WaveguideSpec,
    theta_grid: &[f64],
    opts: &KernelOptions,
) -> Result<Amplitudes> {
    let side = incidence.side();
    // transmission angles share the sign of cos θ0
    if let Some(bad) = theta_grid.iter().find(|&&t| !in_sector(t, side)) {
        return Err(Error::Domain(format!(
            "θ = {bad} is outside the transmission sector or too close to ±π/2"
        )));
    }
    let k = incidence.k();
    let p0 = incidence.p0();
    let kc0 = incidence.k_cos();
    let (am, ap) = (spec.a_minus(), spec.a_plus());
    let table = ModeTable::new(k, spec, default_truncation(spec.n_star(k)).min(opts.max_modes))?;
    let i = Complex64::i();
    let rows = theta_grid
        .par_iter()
        .map(|&theta| {
            let p = k * theta.sin();
            let kc = k * theta.cos();
            let g = table.gamma(p, p0, opts)?;
            let theta_r = mirror_angle(theta);
            let kcr = -kc;
            let wall = wall_terms(theta_r, incidence, spec)?;
            let (t, r_int) = match side {
                Side::Left => (
                    -i * sqrt_2pi() * kc * Complex64::from_polar(1.0, am * kc0 - ap * kc) * g.gamma_plus,
                    i * sqrt_2pi() * kcr * Complex64::from_polar(1.0, am * (kc0 - kcr)) * g.gamma_minus,
                ),
                Side::Right => (
                    i * sqrt_2pi() * kc * Complex64::from_polar(1.0, ap * kc0 - am * kc) * g.gamma_plus,
                    -i * sqrt_2pi() * kcr * Complex64::from_polar(1.0, ap * (kc0 - kcr)) * g.gamma_minus,
                ),
            };
            let r = -i * sqrt_2pi() * wall.smooth + r_int;
            Ok((theta_r, r, t, g.modes_used))
        })
        .collect::<Result<Vec<_>>>()?;
    let phase = wall_terms(mirror_angle(incidence.theta0()), incidence, spec)?;
    Ok(Amplitudes {
        r: AmplitudeWithDelta {
            delta_coeff: phase.delta.coeff,
            theta_sing: phase.delta.theta,
            theta: rows.iter().map(|r| r.0).collect(),
            smooth: rows.iter().map(|r| r.1).collect(),
        },
        t: AmplitudeWithDelta {
            delta_coeff: i,
            theta_sing: incidence.theta0(),
            theta: theta_grid.to_vec(),
            smooth: rows.iter().map(|r| r.2).collect(),
        },
        modes_used: rows.iter().map(|r| r.3).max().unwrap_or(0),
    })
}

/// A coefficient function of `p`: a delta `delta_coeff·δ(p - delta_p)` plus
/// a smooth part sampled on `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAndSmooth {
    pub delta_p: f64,
    pub delta_coeff: Complex64,
    pub p: Vec<f64>,
    pub smooth: Vec<Complex64>,
}

impl DeltaAndSmooth {
    fn zero(p: &[f64]) -> Self {
        Self {
            delta_p: 0.0,
            delta_coeff: Complex64::new(0.0, 0.0),
            p: p.to_vec(),
            smooth: vec![Complex64::new(0.0, 0.0); p.len()],
        }
    }

    /// Restriction to `|p| < k`.
    fn project(&self, k: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            delta_p: self.delta_p,
            delta_coeff: if self.delta_p.abs() < k { self.delta_coeff } else { zero },
            p: self.p.clone(),
            smooth: self
                .p
                .iter()
                .zip(&self.smooth)
                .map(|(p, v)| if p.abs() < k { *v } else { zero })
                .collect(),
        }
    }
}

/// Asymptotic coefficient functions of the scattering solution.
///
/// `script_a_plus`, `script_b_minus` are the coefficients of the outgoing
/// waves before projection onto `|p| < k`; `a_plus`, `b_minus` are their
/// projections, and `a_minus`, `b_plus` describe the incident wave.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a_minus: DeltaAndSmooth,
    pub b_minus: DeltaAndSmooth,
    pub a_plus: DeltaAndSmooth,
    pub b_plus: DeltaAndSmooth,
    pub script_a_plus: DeltaAndSmooth,
    pub script_b_minus: DeltaAndSmooth,
}

/// Coefficient functions on `p_grid` for the given incidence.
///
/// The interior parts are `2πϖ(p) e^{…} Γ±(p, p0)`, the wall part
/// `∓ϖ0 e^{…}[2πδ(p - p0) - Λ(p, p0)]` on the source side. Outside the
/// light cone `Γ±` is summed with the same mode coefficients.
pub fn coefficient_set(
    incidence: &Incidence,
    spec: &WaveguideSpec,
    p_grid: &[f64],
    opts: &KernelOptions,
) -> Result<CoefficientSet> {
    let k = incidence.k();
    let p0 = incidence.p0();
    let vp0 = varpi(p0, k).value();
    let (am, ap) = (spec.a_minus(), spec.a_plus());
    let i = Complex64::i();
    let table = ModeTable::new(k, spec, default_truncation(spec.n_star(k)).min(opts.max_modes))?;
    let gammas = p_grid
        .par_iter()
        .map(|&p| table.gamma_unchecked(p, p0, opts))
        .collect::<Result<Vec<_>>>()?;
    let incident = DeltaAndSmooth {
        delta_p: p0,
        delta_coeff: 2.0 * PI * vp0,
        ..DeltaAndSmooth::zero(p_grid)
    };
    let mut transmitted = DeltaAndSmooth::zero(p_grid);
    let mut reflected = DeltaAndSmooth::zero(p_grid);
    let (src_face, wall_sign) = match incidence.side() {
        Side::Left => (am, 1.0),
        Side::Right => (ap, -1.0),
    };
    // ϖ0 e^{±2i a ϖ0} with the face on the source side
    let wall = vp0 * (i * wall_sign * 2.0 * src_face * vp0).exp();
    reflected.delta_p = p0;
    reflected.delta_coeff = wall * 2.0 * PI;
    for (j, (&p, g)) in p_grid.iter().zip(&gammas).enumerate() {
        let v = varpi(p, k).value();
        let lam = lambda_kernel(p, p0, spec.b());
        match incidence.side() {
            Side::Left => {
                transmitted.smooth[j] = 2.0 * PI * v * (i * (am * vp0 - ap * v)).exp() * g.gamma_plus;
                reflected.smooth[j] = 2.0 * PI * v * (i * am * (vp0 + v)).exp() * g.gamma_minus - wall * lam;
            }
            Side::Right => {
                transmitted.smooth[j] = 2.0 * PI * v * (i * (am * v - ap * vp0)).exp() * g.gamma_plus;
                reflected.smooth[j] = 2.0 * PI * v * (-i * ap * (vp0 + v)).exp() * g.gamma_minus - wall * lam;
            }
        }
    }
    transmitted.delta_p = p0;
    let zero = DeltaAndSmooth {
        delta_p: p0,
        ..DeltaAndSmooth::zero(p_grid)
    };
    let (a_minus, b_plus, script_a_plus, script_b_minus) = match incidence.side() {
        Side::Left => (incident, zero, transmitted, reflected),
        Side::Right => (zero, incident, reflected, transmitted),
    };
    Ok(CoefficientSet {
        b_minus: script_b_minus.project(k),
        a_plus: script_a_plus.project(k),
        a_minus,
        b_plus,
        script_a_plus,
        script_b_minus,
    })
}
