//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature for complex
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9]
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> Panel {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel { lo, hi, value, error }
}

/// Adaptive integral of `f` over `[lo, hi]`; succeeds once the summed
/// Kronrod–Gauss difference is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if lo == hi {
        return Ok(QuadratureResult {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            panels: 0,
        });
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain("quadrature bounds must be finite".into()));
    }
    let mut heap = BinaryHeap::new();
    let first = gk21(f, lo, hi);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature {
                panels: heap.len(),
                error_estimate: f64::INFINITY,
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                panels: heap.len(),
                error_estimate: err,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // panel cannot be split further in floating point
            return Err(Error::Quadrature {
                panels: heap.len() + 1,
                error_estimate: err,
            });
        }
        let l = gk21(f, worst.lo, mid);
        let r = gk21(f, mid, worst.hi);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // re-sum in a fixed order to avoid drift from incremental updates
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        panels: panels.len(),
    })
}

/// Integral over `[lo, hi]` with panel boundaries forced at `±k`, where
/// integrands built from `ϖ(p)` have square-root kinks.
///
/// The absolute tolerance is shared evenly among the sub-intervals.
pub fn branch_split_quadrature<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    k: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    let mut cuts = vec![lo];
    for c in [-k.abs(), k.abs()] {
        if c > lo && c < hi && cuts.last() != Some(&c) {
            cuts.push(c);
        }
    }
    cuts.push(hi);
    let pieces = (cuts.len() - 1) as f64;
    let opts = QuadratureOptions {
        abs_tol: tol / pieces,
        ..Default::default()
    };
    let mut out = QuadratureResult {
        value: Complex64::new(0.0, 0.0),
        error_estimate: 0.0,
        panels: 0,
    };
    for w in cuts.windows(2) {
        let r = integrate(f, w[0], w[1], &opts)?;
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.panels += r.panels;
    }
    Ok(out)
}
