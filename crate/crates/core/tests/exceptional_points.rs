//! Behaviour at and around exceptional wavenumbers, and the empty guide.

use std::f64::consts::PI;

use num_complex::Complex64;
use wavescat::scattering::{
    amplitudes, gamma_kernel, mode_injection, per_mode_coefficients, s_block, transmission_grid, KernelOptions,
    ModeKind,
};
use wavescat::well::phi_tilde;
use wavescat::{Incidence, Side, WaveguideSpec};

#[test]
fn empty_guide_has_no_interior_reflection_on_a_grid() {
    let (k, b) = (2.7, 1.9);
    let spec = WaveguideSpec::new(-0.3, 2.2, b, 0.0).unwrap();
    let opts = KernelOptions::default();
    let mut worst = 0.0f64;
    for i in 0..21 {
        for j in 0..21 {
            let p = k * (-0.95 + 1.9 * i as f64 / 20.0);
            let p0 = k * (-0.95 + 1.9 * j as f64 / 20.0);
            worst = worst.max(gamma_kernel(p, p0, k, &spec, &opts).unwrap().gamma_minus.norm());
        }
    }
    assert!(worst <= 1e-12);
}

/// `Σ_{n≥2} |φ̃_n(p0) φ̃_n(p)| e^{-a|ϖ_n|} / 2π`.
fn length_tail(p: f64, p0: f64, k: f64, b: f64, a: f64) -> f64 {
    (2..4000)
        .map(|n| {
            let vp = wavescat::dispersion::varpi_mode(n, k, b).value();
            (phi_tilde(n, p0, b) * phi_tilde(n, p, b)).norm() * (-a * vp.norm()).exp()
        })
        .sum::<f64>()
        / (2.0 * PI)
}

#[test]
fn transmission_is_length_invariant_at_empty_exceptional_point() {
    let b = 1.3;
    let k = PI / b;
    let opts = KernelOptions::default();
    let (p, p0) = (0.3 * k, -0.2 * k);
    let mut values = Vec::new();
    for factor in [10.0, 20.0, 40.0] {
        let a = factor * b;
        let spec = WaveguideSpec::new(0.0, a, b, 0.0).unwrap();
        let inj = mode_injection(1, k, &spec).unwrap();
        assert!((inj.transmission - 1.0).norm() <= 1e-12);
        assert_eq!(inj.reflection, Complex64::new(0.0, 0.0));
        values.push((a, gamma_kernel(p, p0, k, &spec, &opts).unwrap().gamma_plus));
    }
    for w in values.windows(2) {
        let ((a1, g1), (a2, g2)) = (w[0], w[1]);
        let bound = length_tail(p, p0, k, b, a1) + length_tail(p, p0, k, b, a2);
        assert!((g1 - g2).norm() <= bound, "{:e} > {bound:e}", (g1 - g2).norm());
    }
}

#[test]
fn limit_branch_obeys_exceptional_algebra() {
    for (b, v0, n, a) in [(PI, 3.0, 2, 2.0), (1.4, -1.0, 1, 5.0), (2.2, 6.5, 4, 0.7)] {
        let ks = ((PI * n as f64 / b).powi(2) + v0).sqrt();
        let spec = WaveguideSpec::new(0.0, a, b, v0).unwrap();
        let c = per_mode_coefficients(&spec.mode(n, ks), ks, &spec).unwrap();
        assert_eq!(c.kind, ModeKind::Exceptional);
        assert!((c.c_minus - (c.c_plus - 1.0)).norm() <= 1e-12);
    }
}

#[test]
fn amplitudes_are_continuous_across_exceptional_point() {
    let (b, v0) = (PI, 1.0f64);
    let ks = (4.0 + v0).sqrt();
    let spec = WaveguideSpec::new(-0.5, 1.5, b, v0).unwrap();
    let grid = transmission_grid(Side::Left, 181, 0.5).unwrap();
    let opts = KernelOptions::default();
    let at = |k: f64| amplitudes(&Incidence::new(k, 0.4).unwrap(), &spec, &grid, &opts).unwrap();
    let centre = at(ks);
    for eps in [-1e-6, 1e-6] {
        let near = at(ks + eps);
        for j in 0..grid.len() {
            assert!((near.t.smooth[j] - centre.t.smooth[j]).norm() <= 1e-4);
            assert!((near.r.smooth[j] - centre.r.smooth[j]).norm() <= 1e-4);
        }
    }
}

#[test]
fn injection_reproduces_exceptional_multiplier() {
    let (b, v0, a) = (1.7, 2.5, 3.0);
    let n = 2;
    let ks = ((PI * n as f64 / b).powi(2) + v0).sqrt();
    let spec = WaveguideSpec::new(-1.0, -1.0 + a, b, v0).unwrap();
    let vp = spec.mode(n, ks).varpi();
    let i = Complex64::i();
    let half = i * a * vp / 2.0;
    let want_t = (-i * a * vp).exp() / (1.0 - half);
    let want_r = half / (1.0 - half) * (2.0 * i * spec.a_minus() * vp).exp();
    let blk = s_block(n, ks, &spec).unwrap();
    let (t, r) = blk.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    assert!((t - want_t).norm() <= 1e-12);
    assert!((r - want_r).norm() <= 1e-12);
    let inj = mode_injection(n, ks, &spec).unwrap();
    assert_eq!((inj.transmission, inj.reflection), (t, r));
}

#[test]
fn empty_exceptional_injection_is_exactly_transparent() {
    for b in [1.0, PI, 2.6] {
        let spec = WaveguideSpec::new(0.0, 7.0 * b, b, 0.0).unwrap();
        let inj = mode_injection(1, PI / b, &spec).unwrap();
        assert_eq!(inj.transmission, Complex64::new(1.0, 0.0));
        assert_eq!(inj.reflection, Complex64::new(0.0, 0.0));
    }
}
