use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::quadrature::{self, Tolerance};

/// Where (and how strongly) the dispersion coefficient vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `k(0) = 0`.
    Boundary0,
    /// `k(1) = 0`.
    Boundary1,
    /// `k(x0) = 0` with degeneracy constant `M ∈ (0, 1)`.
    InteriorWeak,
    /// `k(x0) = 0` with degeneracy constant `M ∈ [1, 2)`.
    InteriorStrong,
    NonDegenerate,
}

impl Regime {
    pub fn is_interior(self) -> bool {
        matches!(self, Regime::InteriorWeak | Regime::InteriorStrong)
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Regime::Boundary0 | Regime::Boundary1)
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Profile {
    /// `|x - p|^α` about the degeneracy point `p`.
    PowerLaw { alpha: f64 },
    /// `c0 + c1·x`, strictly positive on `[0, 1]`.
    Affine { c0: f64, c1: f64 },
    /// User-supplied `k` and `k'`.
    Custom { k: ScalarFn, dk: ScalarFn },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::PowerLaw { alpha } => write!(f, "PowerLaw {{ alpha: {alpha} }}"),
            Profile::Affine { c0, c1 } => write!(f, "Affine {{ c0: {c0}, c1: {c1} }}"),
            Profile::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// The diffusion coefficient `k(x)` together with its degeneracy data.
#[derive(Debug, Clone)]
pub struct DispersionCoefficient {
    regime: Regime,
    profile: Profile,
    x0: Option<f64>,
    m: f64,
}

impl DispersionCoefficient {
    /// `k(x) = x^α`.
    pub fn boundary0(alpha: f64) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        Ok(Self { regime: Regime::Boundary0, profile: Profile::PowerLaw { alpha }, x0: None, m: alpha })
    }

    /// `k(x) = (1 - x)^α`.
    pub fn boundary1(alpha: f64) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        Ok(Self { regime: Regime::Boundary1, profile: Profile::PowerLaw { alpha }, x0: None, m: alpha })
    }

    /// `k(x) = |x - x0|^α`; the regime follows from `α` since `M = α`.
    pub fn interior(alpha: f64, x0: f64) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        check_x0(x0)?;
        let regime = if alpha < 1.0 {
            Regime::InteriorWeak
        } else if alpha < 2.0 {
            Regime::InteriorStrong
        } else {
            return Err(ModelError::Coefficient(format!(
                "interior power law needs alpha < 2 (got {alpha})"
            )));
        };
        Ok(Self { regime, profile: Profile::PowerLaw { alpha }, x0: Some(x0), m: alpha })
    }

    /// Interior power law with an explicit regime tag, rejected when the tag
    /// does not match `α`.
    pub fn interior_tagged(regime: Regime, alpha: f64, x0: f64) -> Result<Self, ModelError> {
        let k = Self::interior(alpha, x0)?;
        if k.regime != regime {
            return Err(ModelError::Coefficient(format!(
                "regime {regime:?} is inconsistent with alpha = {alpha} (M = alpha)"
            )));
        }
        Ok(k)
    }

    /// `k(x) = c0 + c1·x`.
    pub fn affine(c0: f64, c1: f64) -> Result<Self, ModelError> {
        if !(c0 > 0.0 && c0 + c1 > 0.0) || !c0.is_finite() || !c1.is_finite() {
            return Err(ModelError::Coefficient(format!(
                "affine coefficient {c0} + {c1}x must be strictly positive on [0,1]"
            )));
        }
        Ok(Self { regime: Regime::NonDegenerate, profile: Profile::Affine { c0, c1 }, x0: None, m: 0.0 })
    }

    pub fn constant(c: f64) -> Result<Self, ModelError> {
        Self::affine(c, 0.0)
    }

    /// User-defined coefficient. `x0` is required for interior regimes and
    /// ignored otherwise; `m` is the declared degeneracy constant.
    pub fn custom(regime: Regime, x0: Option<f64>, m: f64, k: ScalarFn, dk: ScalarFn) -> Result<Self, ModelError> {
        let x0 = if regime.is_interior() {
            let x0 = x0.ok_or_else(|| ModelError::Coefficient("interior regime needs x0".into()))?;
            check_x0(x0)?;
            Some(x0)
        } else {
            None
        };
        match regime {
            Regime::InteriorWeak if !(m > 0.0 && m < 1.0) => {
                return Err(ModelError::Coefficient(format!("weak interior regime needs M in (0,1), got {m}")))
            }
            Regime::InteriorStrong if !(1.0..2.0).contains(&m) => {
                return Err(ModelError::Coefficient(format!("strong interior regime needs M in [1,2), got {m}")))
            }
            _ => {}
        }
        Ok(Self { regime, profile: Profile::Custom { k, dk }, x0, m })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn x0(&self) -> Option<f64> {
        self.x0
    }

    /// The point where `k` vanishes, if any.
    pub fn degeneracy_point(&self) -> Option<f64> {
        match self.regime {
            Regime::Boundary0 => Some(0.0),
            Regime::Boundary1 => Some(1.0),
            Regime::InteriorWeak | Regime::InteriorStrong => self.x0,
            Regime::NonDegenerate => None,
        }
    }

    /// Power-law exponent, when the coefficient is a built-in power law.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.profile {
            Profile::PowerLaw { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Whether `∫ dx/k` is finite across the degeneracy point.
    pub fn locally_integrable_inverse(&self) -> bool {
        match self.regime {
            Regime::NonDegenerate => true,
            _ => self.m < 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ModelError> {
        check_domain(x)?;
        Ok(self.k_unchecked(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64, ModelError> {
        check_domain(x)?;
        Ok(self.dk_unchecked(x))
    }

    pub(crate) fn k_unchecked(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::PowerLaw { alpha } => {
                let d = self.distance(x);
                if d == 0.0 {
                    0.0
                } else {
                    d.powf(*alpha)
                }
            }
            Profile::Affine { c0, c1 } => c0 + c1 * x,
            Profile::Custom { k, .. } => k(x),
        }
    }

    pub(crate) fn dk_unchecked(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::PowerLaw { alpha } => {
                let d = self.distance(x);
                let sign = self.side(x);
                if d == 0.0 {
                    if *alpha > 1.0 {
                        0.0
                    } else if *alpha == 1.0 {
                        sign
                    } else {
                        f64::INFINITY * if sign == 0.0 { 1.0 } else { sign }
                    }
                } else {
                    sign * alpha * d.powf(alpha - 1.0)
                }
            }
            Profile::Affine { c1, .. } => *c1,
            Profile::Custom { dk, .. } => dk(x),
        }
    }

    /// `‖k'‖_∞` on `[0, 1]` (infinite for power laws with `α < 1`).
    pub fn derivative_sup(&self) -> f64 {
        match &self.profile {
            Profile::PowerLaw { alpha } => {
                if *alpha < 1.0 {
                    return f64::INFINITY;
                }
                let reach = match self.regime {
                    Regime::Boundary0 | Regime::Boundary1 => 1.0,
                    _ => {
                        let x0 = self.x0.unwrap_or(0.5);
                        x0.max(1.0 - x0)
                    }
                };
                alpha * reach.powf(alpha - 1.0)
            }
            Profile::Affine { c1, .. } => c1.abs(),
            Profile::Custom { dk, .. } => {
                let n = 4096;
                (0..=n).map(|i| dk(i as f64 / n as f64).abs()).fold(0.0, f64::max)
            }
        }
    }

    /// Distance from the degeneracy point (power laws only).
    fn distance(&self, x: f64) -> f64 {
        match self.regime {
            Regime::Boundary0 => x,
            Regime::Boundary1 => 1.0 - x,
            _ => (x - self.x0.unwrap_or(0.0)).abs(),
        }
    }

    /// `d(distance)/dx`.
    fn side(&self, x: f64) -> f64 {
        match self.regime {
            Regime::Boundary0 => 1.0,
            Regime::Boundary1 => -1.0,
            _ => {
                let x0 = self.x0.unwrap_or(0.0);
                if x > x0 {
                    1.0
                } else if x < x0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_a^b dx / k(x)` for `0 ≤ a ≤ b ≤ 1`; `+∞` when divergent.
    pub fn inverse_integral(&self, a: f64, b: f64) -> Result<f64, ModelError> {
        check_domain(a)?;
        check_domain(b)?;
        if b < a {
            return self.inverse_integral(b, a).map(|v| -v);
        }
        if a == b {
            return Ok(0.0);
        }
        match &self.profile {
            Profile::PowerLaw { alpha } => {
                let p = self.degeneracy_point().expect("power laws are degenerate");
                let antideriv = |d: f64| -> f64 {
                    // ∫_0^d u^{-α} du, possibly infinite.
                    if *alpha == 1.0 {
                        if d == 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            d.ln()
                        }
                    } else if *alpha < 1.0 {
                        d.powf(1.0 - alpha) / (1.0 - alpha)
                    } else if d == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        -d.powf(1.0 - alpha) / (alpha - 1.0)
                    }
                };
                let piece = |lo: f64, hi: f64| -> f64 {
                    // lo, hi distances on one side of p, lo ≤ hi.
                    if lo == hi {
                        0.0
                    } else {
                        antideriv(hi) - antideriv(lo)
                    }
                };
                let v = if b <= p {
                    piece(p - b, p - a)
                } else if a >= p {
                    piece(a - p, b - p)
                } else {
                    piece(0.0, p - a) + piece(0.0, b - p)
                };
                Ok(if v.is_nan() { f64::INFINITY } else { v })
            }
            Profile::Affine { c0, c1 } => {
                if *c1 == 0.0 {
                    Ok((b - a) / c0)
                } else {
                    Ok(((c0 + c1 * b) / (c0 + c1 * a)).ln() / c1)
                }
            }
            Profile::Custom { k, .. } => {
                let tol = Tolerance::default();
                let Some(p) = self.degeneracy_point().filter(|&p| p >= a && p <= b) else {
                    return Ok(quadrature::integrate(|x| 1.0 / k(x), a, b, tol).unwrap_or(f64::INFINITY));
                };
                if !self.locally_integrable_inverse() {
                    return Ok(f64::INFINITY);
                }
                // x = p ∓ u² near the degeneracy point
                let side = |d: f64, sign: f64| -> f64 {
                    if d == 0.0 {
                        return 0.0;
                    }
                    quadrature::integrate(|u| 2.0 * u / k(p + sign * u * u), 0.0, d.sqrt(), tol).unwrap_or(f64::INFINITY)
                };
                Ok(side(p - a, -1.0) + side(b - p, 1.0))
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), ModelError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Coefficient(format!("power-law exponent must be positive, got {alpha}")))
    }
}

fn check_x0(x0: f64) -> Result<(), ModelError> {
    if x0 > 0.0 && x0 < 1.0 {
        Ok(())
    } else {
        Err(ModelError::Coefficient(format!("x0 must lie in (0,1), got {x0}")))
    }
}

fn check_domain(x: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(ModelError::Domain(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let k = DispersionCoefficient::boundary0(1.0).unwrap();
        assert_eq!(k.eval(0.0).unwrap(), 0.0);
        let k = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        assert_eq!(k.regime(), Regime::InteriorWeak);
        assert!((k.eval(0.75).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(k.eval(0.5).unwrap(), 0.0);
        let k = DispersionCoefficient::affine(1.0, 1.0).unwrap();
        assert!((k.eval(0.5).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn eval_outside_domain_fails() {
        let k = DispersionCoefficient::boundary1(0.5).unwrap();
        assert!(matches!(k.eval(1.5), Err(ModelError::Domain(_))));
        assert!(matches!(k.eval(-0.1), Err(ModelError::Domain(_))));
    }

    #[test]
    fn regime_tag_must_match_alpha() {
        assert!(DispersionCoefficient::interior_tagged(Regime::InteriorStrong, 0.5, 0.5).is_err());
        assert!(DispersionCoefficient::interior_tagged(Regime::InteriorStrong, 1.5, 0.5).is_ok());
        assert!(DispersionCoefficient::interior(2.5, 0.5).is_err());
        assert!(DispersionCoefficient::affine(-1.0, 0.5).is_err());
    }

    #[test]
    fn inverse_integral_closed_forms() {
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        // ∫_0^1 x^{-1/2} = 2
        assert!((k.inverse_integral(0.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
        let k = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        // straddling: 2 · 2·(0.25)^{1/2} = 2
        assert!((k.inverse_integral(0.25, 0.75).unwrap() - 2.0).abs() < 1e-14);
        let k = DispersionCoefficient::interior(1.5, 0.5).unwrap();
        assert!(k.inverse_integral(0.4, 0.6).unwrap().is_infinite());
        assert!(k.inverse_integral(0.6, 0.7).unwrap().is_finite());
        let k = DispersionCoefficient::affine(1.0, 1.0).unwrap();
        assert!((k.inverse_integral(0.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn custom_inverse_integral_matches_power_law() {
        let k = DispersionCoefficient::custom(
            Regime::InteriorWeak,
            Some(0.5),
            0.5,
            Arc::new(|x: f64| (x - 0.5).abs().sqrt()),
            Arc::new(|x: f64| 0.5 * (x - 0.5).signum() / (x - 0.5).abs().sqrt()),
        )
        .unwrap();
        let reference = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        for (a, b) in [(0.0, 0.3), (0.45, 0.55), (0.5, 1.0)] {
            let lhs = k.inverse_integral(a, b).unwrap();
            let rhs = reference.inverse_integral(a, b).unwrap();
            assert!((lhs - rhs).abs() < 1e-8 * rhs, "{a} {b}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn derivative_sup() {
        assert!(DispersionCoefficient::boundary0(0.5).unwrap().derivative_sup().is_infinite());
        assert_eq!(DispersionCoefficient::boundary0(1.5).unwrap().derivative_sup(), 1.5);
        assert_eq!(DispersionCoefficient::affine(1.0, 1.0).unwrap().derivative_sup(), 1.0);
    }
}
