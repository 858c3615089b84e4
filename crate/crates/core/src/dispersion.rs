//! Branch-correct square roots for the free and in-guide dispersion
//! relations, and the closed-form set of exceptional wavenumbers.
//!
//! Every root returned here lies in the closed upper half-plane: real and
//! non-negative on the propagating side, `i·|…|` on the evanescent side, so
//! factors `exp(i·root·x)` stay bounded for `x >= 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible `|cos θ0|`; grazing incidence is rejected.
pub const MIN_ABS_COS_THETA: f64 = 1e-6;

/// Default relative tolerance for [`is_exceptional`].
pub const DEFAULT_EXCEPTIONAL_TOL: f64 = 1e-9;

/// A square root carrying the branch convention `Im >= 0`, with `Re >= 0`
/// whenever `Im == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchedRoot(Complex64);

impl BranchedRoot {
    pub fn value(self) -> Complex64 {
        self.0
    }

    /// True when the root is real (propagating branch).
    pub fn is_real(self) -> bool {
        self.0.im == 0.0
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl From<BranchedRoot> for Complex64 {
    fn from(r: BranchedRoot) -> Self {
        r.0
    }
}

/// Principal square root rotated into the closed upper half-plane.
pub fn branched_sqrt(z: Complex64) -> BranchedRoot {
    if z.im == 0.0 {
        return if z.re >= 0.0 {
            BranchedRoot(Complex64::new(z.re.sqrt(), 0.0))
        } else {
            BranchedRoot(Complex64::new(0.0, (-z.re).sqrt()))
        };
    }
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        BranchedRoot(-s)
    } else {
        BranchedRoot(s)
    }
}

/// `ϖ(p) = sqrt(k² - p²)` for `|p| < k`, `i sqrt(p² - k²)` otherwise.
pub fn varpi(p: f64, k: f64) -> BranchedRoot {
    let ap = p.abs();
    if ap < k {
        // (k - |p|)(k + |p|) avoids cancellation near the branch point
        BranchedRoot(Complex64::new(((k - ap) * (k + ap)).sqrt(), 0.0))
    } else {
        BranchedRoot(Complex64::new(0.0, ((ap - k) * (ap + k)).sqrt()))
    }
}

/// In-guide longitudinal wavenumber `w_n = sqrt(k² - E_n)` on the upper
/// half-plane branch. Real `E_n` reproduces the two-case definition exactly.
pub fn w_mode(energy: Complex64, k: f64) -> BranchedRoot {
    branched_sqrt(Complex64::new(k * k - energy.re, -energy.im))
}

/// Free transverse-mode wavenumber `ϖ_n = ϖ(πn/b)`.
pub fn varpi_mode(n: usize, k: f64, b: f64) -> BranchedRoot {
    varpi(PI * n as f64 / b, k)
}

/// Number of propagating in-guide modes, `floor((b/π) sqrt(k² - V0))`, or 0
/// when `k² < V0`.
pub fn n_star(k: f64, b: f64, v0: f64) -> usize {
    let d = k * k - v0;
    if d < 0.0 {
        return 0;
    }
    (b / PI * d.sqrt()).floor() as usize
}

/// Exceptional wavenumber of mode `n`, `sqrt((πn/b)² + V0)`, when positive.
pub fn exceptional_wavenumber(n: usize, b: f64, v0: f64) -> Option<f64> {
    let q = PI * n as f64 / b;
    let e = q * q + v0;
    (e > 0.0).then(|| e.sqrt())
}

/// All exceptional wavenumbers `k⋆` with `k_min < k⋆ <= k_max`, ascending,
/// paired with their mode index.
pub fn exceptional_wavenumbers(k_min: f64, k_max: f64, b: f64, v0: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    if !(k_max > k_min) || b <= 0.0 {
        return out;
    }
    let mut n = 1usize;
    loop {
        let q = PI * n as f64 / b;
        if q * q + v0 > k_max * k_max {
            break;
        }
        if let Some(ks) = exceptional_wavenumber(n, b, v0) {
            if ks > k_min && ks <= k_max {
                out.push((ks, n));
            }
        }
        n += 1;
    }
    out
}

/// Mode index `n` whose exceptional wavenumber lies within `rel_tol·k` of
/// `k`, if any.
pub fn is_exceptional(k: f64, b: f64, v0: f64, rel_tol: f64) -> Option<usize> {
    let x = b / PI * (k * k - v0).max(0.0).sqrt();
    let centre = x.round() as usize;
    let lo = centre.saturating_sub(1).max(1);
    (lo..=centre + 1).find(|&n| exceptional_wavenumber(n, b, v0).is_some_and(|ks| (k - ks).abs() <= rel_tol * k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// An incident plane wave: wavenumber, angle (radians) and source side.
///
/// Left incidence has `θ0 ∈ (-π/2, π/2)`, right incidence `θ0 ∈ (π/2, 3π/2)`;
/// angles are normalised into `(-π/2, 3π/2]` on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    k: f64,
    theta0: f64,
    side: Side,
}

impl Incidence {
    pub fn new(k: f64, theta0: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::invalid("k", format!("must be positive, got {k}")));
        }
        if !theta0.is_finite() {
            return Err(Error::invalid("theta0", "must be finite"));
        }
        if theta0.cos().abs() < MIN_ABS_COS_THETA {
            return Err(Error::invalid(
                "theta0",
                format!("|cos θ0| must be >= {MIN_ABS_COS_THETA:e} (grazing incidence)"),
            ));
        }
        let mut t = theta0;
        while t <= -FRAC_PI_2 {
            t += 2.0 * PI;
        }
        while t > 3.0 * FRAC_PI_2 {
            t -= 2.0 * PI;
        }
        let side = if t.cos() > 0.0 { Side::Left } else { Side::Right };
        Ok(Self { k, theta0: t, side })
    }

    /// Like [`Incidence::new`] but rejects an angle outside `side`'s sector.
    pub fn with_side(k: f64, theta0: f64, side: Side) -> Result<Self> {
        let inc = Self::new(k, theta0)?;
        if inc.side != side {
            return Err(Error::invalid(
                "theta0",
                format!(
                    "angle {theta0} rad lies in the {} sector, not {}",
                    inc.side.as_str(),
                    side.as_str()
                ),
            ));
        }
        Ok(inc)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Transverse momentum `p0 = k sin θ0`.
    pub fn p0(&self) -> f64 {
        self.k * self.theta0.sin()
    }

    /// Signed `k cos θ0` (negative for right incidence).
    pub fn k_cos(&self) -> f64 {
        self.k * self.theta0.cos()
    }
}
