//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used for custom coefficients where no closed form exists. Integrable
//! endpoint singularities are handled by bisection: the error estimate
//! on the interval touching the singularity shrinks geometrically with depth.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    NotConverged { a: f64, b: f64, error: f64 },
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

// Gauss weights pair with the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Maximum number of subintervals.
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-14, max_intervals: 4000 }
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for (idx, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        if x == 0.0 {
            let fc = f(c);
            if !fc.is_finite() {
                return Err(QuadratureError::NonFinite(c));
            }
            k += w * fc;
            g += WG[3] * fc;
        } else {
            let (xl, xr) = (c - r * x, c + r * x);
            let (fl, fr) = (f(xl), f(xr));
            if !fl.is_finite() {
                return Err(QuadratureError::NonFinite(xl));
            }
            if !fr.is_finite() {
                return Err(QuadratureError::NonFinite(xr));
            }
            k += w * (fl + fr);
            if idx % 2 == 1 {
                g += WG[idx / 2] * (fl + fr);
            }
        }
    }
    Ok((k * r, ((k - g) * r).abs()))
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, repeatedly bisecting the subinterval with
/// the largest error estimate. The integrand is never evaluated at the
/// endpoints, so integrable endpoint singularities are admissible.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let (value, error) = kronrod(&f, a, b)?;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Piece { lo: a, hi: b, value, error });
    let (mut total, mut total_err) = (value, error);
    loop {
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        let p = heap.pop().expect("nonempty");
        let mid = 0.5 * (p.lo + p.hi);
        if heap.len() + 2 > tol.max_intervals || mid <= p.lo || mid >= p.hi {
            return Err(QuadratureError::NotConverged { a: p.lo, b: p.hi, error: total_err });
        }
        let (vl, el) = kronrod(&f, p.lo, mid)?;
        let (vr, er) = kronrod(&f, mid, p.hi)?;
        total += vl + vr - p.value;
        total_err += el + er - p.error;
        heap.push(Piece { lo: p.lo, hi: mid, value: vl, error: el });
        heap.push(Piece { lo: mid, hi: p.hi, value: vr, error: er });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let v = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x: f64| x.exp(), 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn divergent_integral_is_reported() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, Tolerance::default());
        assert!(r.is_err());
    }
}
