//! Field maps of the full two-dimensional solution.
//!
//! Each mode of the guide is matched across its two faces as a 1D slab
//! (exterior wavevector `ϖ_n`, interior `w_n`) with the interface solver
//! from the oracle. Outside the guide the field is the incident wave minus
//! its mirror image in the source-side wall, plus the radiation from the
//! aperture fields `Σ u_n φ_n(y)`, propagated with the exact `ϖ(p)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::{Incidence, Side};
use crate::engine::mode::GRAZING_REL;
use crate::error::{Error, Result};
use crate::oracle::quadrature::{integrate, QuadratureOptions};
use crate::oracle::slab::{slab_response, InteriorWave, Slab1D};
use crate::well::{phi_tilde, WaveguideSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Number of guide modes retained.
    pub modes: usize,
    /// Absolute quadrature tolerance, relative to the aperture amplitude.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            modes: 64,
            tol: 1e-8,
            max_panels: 4000,
        }
    }
}

/// What drives the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSource {
    /// An incident plane wave.
    Plane(Incidence),
    /// A wave injected into mode `n` from the left, described mode-wise:
    /// `ψ(x, y) = ψ_n(x) φ_n(y)` for `y ∈ [0, b]`.
    Mode { n: usize, k: f64 },
}

#[derive(Debug, Clone, Copy)]
struct ModeWave {
    n: usize,
    /// Outside wavevector `ϖ_n`.
    varpi: Complex64,
    /// Incoming amplitudes at the left and right faces.
    f: Complex64,
    g: Complex64,
    /// Aperture values `ψ_n(a₋)`, `ψ_n(a₊)`.
    u: Complex64,
    v: Complex64,
    interior: Interior,
}

#[derive(Debug, Clone, Copy)]
enum Interior {
    Slab(InteriorWave),
    /// `e^{iϖ(x - a₋)}` in an empty guide.
    Matched,
}

/// Solved mode amplitudes from which the field is evaluated pointwise.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    source: FieldSource,
    spec: WaveguideSpec,
    k: f64,
    modes: Vec<ModeWave>,
    aperture_scale: f64,
    opts: FieldOptions,
}

fn mode_function(n: usize, y: f64, b: f64) -> f64 {
    if (0.0..=b).contains(&y) {
        (2.0 / b).sqrt() * (PI * n as f64 * y / b).sin()
    } else {
        0.0
    }
}

impl FieldSolution {
    pub fn new(source: FieldSource, spec: &WaveguideSpec, opts: &FieldOptions) -> Result<Self> {
        if opts.modes == 0 {
            return Err(Error::invalid("modes", "need at least one mode"));
        }
        let (k, range) = match source {
            FieldSource::Plane(inc) => (inc.k(), 1..=opts.modes),
            FieldSource::Mode { n, k } => {
                if n == 0 {
                    return Err(Error::invalid("n", "mode index starts at 1"));
                }
                (k, n..=n)
            }
        };
        let (am, ap) = (spec.a_minus(), spec.a_plus());
        let b = spec.b();
        let zero = Complex64::new(0.0, 0.0);
        let modes = range
            .map(|n| {
                let m = spec.mode(n, k);
                let vp = m.varpi();
                let (f, g) = match source {
                    FieldSource::Plane(inc) => {
                        if vp.norm() < GRAZING_REL * k {
                            return Err(Error::GrazingMode { n });
                        }
                        // projected normal derivative of incident-minus-mirror
                        // at the source face, divided by the mode's 2iϖ_n
                        let kc0 = inc.k_cos();
                        let face = if inc.side() == Side::Left { am } else { ap };
                        let a =
                            kc0.abs() * Complex64::from_polar(1.0, kc0 * face) * phi_tilde(n, inc.p0(), b).conj() / vp;
                        if inc.side() == Side::Left {
                            (a, zero)
                        } else {
                            (zero, a)
                        }
                    }
                    FieldSource::Mode { .. } => (Complex64::new(1.0, 0.0), zero),
                };
                if spec.is_empty_guide() {
                    // matched medium: waves pass unchanged
                    let i = Complex64::i();
                    let ph = (i * vp * spec.a()).exp();
                    return Ok(ModeWave {
                        n,
                        varpi: vp,
                        f,
                        g,
                        u: f + g * ph,
                        v: f * ph + g,
                        interior: Interior::Matched,
                    });
                }
                let slab = Slab1D {
                    x_left: am,
                    x_right: ap,
                    wavevector_inside: m.w(),
                    wavevector_outside: vp,
                };
                let r = slab_response(&slab, f, g)?;
                Ok(ModeWave {
                    n,
                    varpi: vp,
                    f,
                    g,
                    u: f + r.reflected_left,
                    v: r.transmitted_right + g,
                    interior: Interior::Slab(r.interior),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let aperture_scale = modes.iter().map(|m| m.u.norm() + m.v.norm()).sum::<f64>().max(1e-300) * b.sqrt();
        Ok(Self {
            source,
            spec: *spec,
            k,
            modes,
            aperture_scale,
            opts: *opts,
        })
    }

    /// Aperture values `ψ_n(a₋)` on the left face, by mode.
    pub fn left_aperture(&self) -> Vec<(usize, Complex64)> {
        self.modes.iter().map(|m| (m.n, m.u)).collect()
    }

    /// Aperture values `ψ_n(a₊)` on the right face, by mode.
    pub fn right_aperture(&self) -> Vec<(usize, Complex64)> {
        self.modes.iter().map(|m| (m.n, m.v)).collect()
    }

    /// Size of the last retained mode on either face, a proxy for the
    /// truncation error of the modal sums.
    pub fn truncation_bound(&self) -> f64 {
        let b = self.spec.b();
        self.modes
            .last()
            .map(|m| (2.0 / b).sqrt() * (m.u.norm() + m.v.norm()))
            .unwrap_or(0.0)
    }

    fn interior_mode(&self, m: &ModeWave, x: f64) -> Complex64 {
        match m.interior {
            Interior::Slab(w) => w.value(x),
            Interior::Matched => {
                let i = Complex64::i();
                m.f * (i * m.varpi * (x - self.spec.a_minus())).exp()
                    + m.g * (-i * m.varpi * (x - self.spec.a_plus())).exp()
            }
        }
    }

    /// Field inside the guide, `a₋ ≤ x ≤ a₊`; zero inside the walls.
    pub fn interior(&self, x: f64, y: f64) -> Complex64 {
        let b = self.spec.b();
        self.modes
            .iter()
            .map(|m| self.interior_mode(m, x) * mode_function(m.n, y, b))
            .sum()
    }

    /// Modal sum of the aperture field on a face (`left` selects `a₋`).
    pub fn face(&self, left: bool, y: f64) -> Complex64 {
        let b = self.spec.b();
        self.modes
            .iter()
            .map(|m| (if left { m.u } else { m.v }) * mode_function(m.n, y, b))
            .sum()
    }

    fn aperture_transform(&self, left: bool, p: f64) -> Complex64 {
        let b = self.spec.b();
        self.modes
            .iter()
            .map(|m| (if left { m.u } else { m.v }) * phi_tilde(m.n, p, b))
            .sum()
    }

    /// Rational parts of the aperture transform, `F(p) = F₀(p) - e^{-ipb} F₁(p)`
    /// with `F_j(p) = sqrt(2/b) Σ c_n q_n s_n^j / (q_n² - p²)`, `q_n = πn/b`,
    /// `s_n = (-1)^n`; valid for complex `p`.
    fn aperture_parts(&self, left: bool, p: Complex64) -> (Complex64, Complex64) {
        let b = self.spec.b();
        let norm = (2.0 / b).sqrt();
        let mut f0 = Complex64::new(0.0, 0.0);
        let mut f1 = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let q = PI * m.n as f64 / b;
            let c = (if left { m.u } else { m.v }) * q / (q * q - p * p);
            f0 += c;
            f1 += if m.n % 2 == 0 { c } else { -c };
        }
        (f0 * norm, f1 * norm)
    }

    /// Momentum beyond every pole `q_n` of the aperture parts and the light cone.
    fn ray_start(&self) -> f64 {
        let b = self.spec.b();
        let q_max = PI * self.modes.iter().map(|m| m.n).max().unwrap_or(1) as f64 / b;
        (1.5 * self.k).max(q_max + PI / b)
    }

    /// `∫_P^∞ e^{p(iY - d)} e^{(p - sqrt(p² - k²)) d} G(p) dp` along the ray from
    /// `P` on which `p(iY - d)` decreases without oscillating.
    fn ray(&self, y_shift: f64, d: f64, start: f64, g: &dyn Fn(Complex64) -> Complex64) -> Result<Complex64> {
        let k = self.k;
        let i = Complex64::i();
        let r = y_shift.hypot(d);
        let dir = if r > 0.0 {
            Complex64::new(d, y_shift) / r
        } else {
            Complex64::new(1.0, 0.0)
        };
        let scale = if r * start > 1.0 { 1.0 / r } else { start };
        let qopts = QuadratureOptions {
            abs_tol: self.opts.tol * self.aperture_scale / 4.0,
            rel_tol: 0.0,
            max_panels: self.opts.max_panels,
        };
        // t = scale·s/(1 - s) maps [0, ∞) onto [0, 1)
        let res = integrate(
            &|s: f64| {
                if s >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let t = scale * s / (1.0 - s);
                let p = start + dir * t;
                let root = (p - k).sqrt() * (p + k).sqrt();
                (p * (i * y_shift) - root * d).exp() * g(p) * dir * (scale / ((1.0 - s) * (1.0 - s)))
            },
            0.0,
            1.0,
            &qopts,
        )?;
        Ok(res.value)
    }

    /// `(1/2π) ∫ dp e^{ipy} e^{iϖ(p) d} F(p)` at distance `d ≥ 0` from a face.
    ///
    /// The propagating window uses `p = k sin θ`, the evanescent band up to
    /// the last pole `p = k cosh u`, and beyond it each exponential piece of
    /// `F` is integrated along its own steepest-descent ray, so no cutoff is
    /// needed even next to the face.
    fn radiate(&self, left: bool, d: f64, y: f64) -> Result<Complex64> {
        let k = self.k;
        let b = self.spec.b();
        let i = Complex64::i();
        let qopts = QuadratureOptions {
            abs_tol: self.opts.tol * self.aperture_scale / 4.0,
            rel_tol: 0.0,
            max_panels: self.opts.max_panels,
        };
        let inner = integrate(
            &|t: f64| {
                let (s, c) = t.sin_cos();
                let p = k * s;
                (i * (p * y + k * c * d)).exp() * self.aperture_transform(left, p) * (k * c)
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &qopts,
        )?;
        let start = self.ray_start();
        let u_max = (start / k).acosh();
        let mut total = inner.value;
        for sign in [1.0, -1.0] {
            let band = integrate(
                &|u: f64| {
                    let p = sign * k * u.cosh();
                    let sh = u.sinh();
                    (i * p * y).exp() * (-k * sh * d).exp() * self.aperture_transform(left, p) * (k * sh)
                },
                0.0,
                u_max,
                &qopts,
            )?;
            total += band.value;
        }
        // beyond the poles: p ↦ ±p, with F₀, F₁ even in p and
        // e^{-ipb} ↦ e^{∓ipb}
        let f0 = |p: Complex64| self.aperture_parts(left, p).0;
        let f1 = |p: Complex64| -self.aperture_parts(left, p).1;
        total += self.ray(y, d, start, &f0)?;
        total += self.ray(y - b, d, start, &f1)?;
        total += self.ray(-y, d, start, &f0)?;
        total += self.ray(b - y, d, start, &f1)?;
        Ok(total / (2.0 * PI))
    }

    /// Incident wave minus its mirror image in the wall at `face`.
    fn direct(&self, inc: &Incidence, face: f64, x: f64, y: f64) -> Complex64 {
        let (p0, kc0) = (inc.p0(), inc.k_cos());
        Complex64::from_polar(1.0, p0 * y + kc0 * x) - Complex64::from_polar(1.0, p0 * y + kc0 * (2.0 * face - x))
    }

    /// Mode-wise field for a single injected mode.
    fn injected(&self, x: f64, y: f64) -> Complex64 {
        let m = &self.modes[0];
        let (am, ap) = (self.spec.a_minus(), self.spec.a_plus());
        let i = Complex64::i();
        let along = if x < am {
            let r = m.u - m.f;
            m.f * (i * m.varpi * (x - am)).exp() + r * (-i * m.varpi * (x - am)).exp()
        } else if x > ap {
            m.v * (i * m.varpi * (x - ap)).exp()
        } else {
            self.interior_mode(m, x)
        };
        along * mode_function(m.n, y, self.spec.b())
    }

    /// Total field at `(x, y)`.
    pub fn at(&self, x: f64, y: f64) -> Result<Complex64> {
        let (am, ap) = (self.spec.a_minus(), self.spec.a_plus());
        let inc = match self.source {
            FieldSource::Mode { .. } => return Ok(self.injected(x, y)),
            FieldSource::Plane(inc) => inc,
        };
        let left_source = inc.side() == Side::Left;
        if x < am {
            let mut psi = self.radiate(true, am - x, y)?;
            if left_source {
                psi += self.direct(&inc, am, x, y);
            }
            Ok(psi)
        } else if x > ap {
            let mut psi = self.radiate(false, x - ap, y)?;
            if !left_source {
                psi += self.direct(&inc, ap, x, y);
            }
            Ok(psi)
        } else if x == am {
            Ok(self.face(true, y))
        } else if x == ap {
            Ok(self.face(false, y))
        } else {
            Ok(self.interior(x, y))
        }
    }
}

/// Samples on a regular grid, stored row-major with `y` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub psi: Vec<Complex64>,
    /// Samples whose quadrature failed; they hold NaN.
    pub failures: usize,
    /// See [`FieldSolution::truncation_bound`].
    pub truncation_bound: f64,
}

impl FieldMap {
    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.psi[ix * self.y.len() + iy]
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// Field on an `nx × ny` grid over `region`.
pub fn field_map(
    source: FieldSource,
    spec: &WaveguideSpec,
    region: &FieldRegion,
    nx: usize,
    ny: usize,
    opts: &FieldOptions,
) -> Result<FieldMap> {
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("field_grid", "need at least 2×2 samples"));
    }
    if !(region.x_max > region.x_min) || !(region.y_max > region.y_min) {
        return Err(Error::invalid("field_box", "max must exceed min on both axes"));
    }
    let sol = FieldSolution::new(source, spec, opts)?;
    let x = linspace(region.x_min, region.x_max, nx);
    let y = linspace(region.y_min, region.y_max, ny);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let samples: Vec<Option<Complex64>> = (0..nx * ny)
        .into_par_iter()
        .map(|j| sol.at(x[j / ny], y[j % ny]).ok())
        .collect();
    let failures = samples.iter().filter(|s| s.is_none()).count();
    Ok(FieldMap {
        psi: samples.into_iter().map(|s| s.unwrap_or(nan)).collect(),
        x,
        y,
        failures,
        truncation_bound: sol.truncation_bound(),
    })
}
