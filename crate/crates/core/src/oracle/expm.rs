//! Matrix exponential by scaling and squaring of a truncated Taylor series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const TAYLOR_ORDER: usize = 18;
const SCALED_NORM: f64 = 0.5;
const MAX_SQUARINGS: i32 = 1000;

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(scale·M)`.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// Taylor series is summed to order 18 (remainder below 1e-22 relative) and
/// the result squared `s` times. Nilpotent inputs terminate the series early
/// and are reproduced exactly.
pub fn dense_expm(m: &DMatrix<Complex64>, scale: Complex64) -> Result<DMatrix<Complex64>> {
    if !m.is_square() {
        return Err(Error::Domain(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let a = m * scale;
    let norm = norm1(&a);
    if !norm.is_finite() {
        return Err(Error::Overflow(norm));
    }
    let n = a.nrows();
    let s = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    if s > MAX_SQUARINGS {
        return Err(Error::Overflow(norm));
    }
    let a = a * Complex64::new(0.5f64.powi(s), 0.0);

    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for j in 1..=TAYLOR_ORDER {
        term = &term * &a * Complex64::new(1.0 / j as f64, 0.0);
        if term.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            break;
        }
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow(norm));
    }
    Ok(result)
}
