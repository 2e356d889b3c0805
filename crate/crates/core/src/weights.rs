//! Carleman weight functions.
//!
//! Every weight has the form `Θ(t, a)·ψ(x)` with `Θ = 1/(t⁴(T-t)⁴a⁴)` and a
//! negative spatial profile `ψ`. Profiles are cached on the space nodes and
//! products `Θ^m·G·e^{2sΘψ}` are formed in log space.

use serde::Serialize;
use thiserror::Error;

use crate::model::{DispersionCoefficient, Lattice, ModelError, Profile, Regime};
use crate::quadrature::{self, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("invalid weight parameter: {0}")]
    Parameter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `Θ(t, a) = 1/(t⁴(T-t)⁴a⁴)` on the open set `t ∈ (0, T)`, `a > 0`.
pub fn theta(t: f64, a: f64, t_final: f64) -> Result<f64, WeightError> {
    log_theta(t, a, t_final).map(f64::exp)
}

pub fn log_theta(t: f64, a: f64, t_final: f64) -> Result<f64, WeightError> {
    if !(t > 0.0 && t < t_final && a > 0.0) {
        return Err(WeightError::Singular(format!("Θ is singular at t = {t}, a = {a} (T = {t_final})")));
    }
    Ok(-4.0 * (t.ln() + (t_final - t).ln() + a.ln()))
}

/// `𝔡 = ‖k'‖_∞`, required finite and positive.
pub fn d_frak(k: &DispersionCoefficient) -> Result<f64, WeightError> {
    let d = k.derivative_sup();
    if !(d.is_finite() && d > 0.0) {
        return Err(WeightError::Parameter(format!("‖k'‖∞ = {d} must be finite and positive")));
    }
    Ok(d)
}

/// `σ(x) = 𝔡 ∫_x^1 dt/k(t)`.
pub fn sigma(k: &DispersionCoefficient, x: f64) -> Result<f64, WeightError> {
    let d = d_frak(k)?;
    let vanishing = match k.degeneracy_point() {
        None => false,
        Some(p) => p >= x,
    };
    if vanishing {
        return Err(WeightError::Singular(format!("k vanishes in [{x}, 1]")));
    }
    Ok(d * k.inverse_integral(x, 1.0)?)
}

/// `Σ_n Rⁿ u^{2n+2-α} / (n!(2n+2-α))`, i.e. `∫_0^u y^{1-α} e^{Ry²} dy`.
fn power_series(u: f64, alpha: f64, r_big: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let u2 = u * u;
    let mut coef = u.powf(2.0 - alpha);
    let mut sum = 0.0;
    for n in 0..400 {
        let nf = n as f64;
        let term = coef / (2.0 * nf + 2.0 - alpha);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= r_big * u2 / (nf + 1.0);
    }
    sum
}

fn moment_quadrature(k: &DispersionCoefficient, p: f64, x: f64, r_big: f64) -> Result<f64, WeightError> {
    let f = |y: f64| {
        let d = y - p;
        if d == 0.0 {
            0.0
        } else {
            d / k.k_unchecked(y) * (r_big * d * d).exp()
        }
    };
    quadrature::integrate(f, p, x, Tolerance::default())
        .map_err(|e| WeightError::Hypothesis(format!("∫(y-p)/k diverges near p = {p}: {e}")))
}

fn check_moment_integrable(k: &DispersionCoefficient) -> Result<(), WeightError> {
    if k.m() >= 2.0 {
        return Err(WeightError::Hypothesis(format!("M = {} ≥ 2 makes ∫(y-p)/k divergent", k.m())));
    }
    Ok(())
}

/// `p(x) = ∫_0^x y/k(y)·e^{Ry²} dy` (boundary degeneracy at 0).
pub fn p_weight(k: &DispersionCoefficient, r_big: f64, x: f64) -> Result<f64, WeightError> {
    require_regime(k, Regime::Boundary0)?;
    check_moment_integrable(k)?;
    k.eval(x)?;
    match k.profile() {
        Profile::PowerLaw { alpha } => Ok(power_series(x, *alpha, r_big)),
        _ => moment_quadrature(k, 0.0, x, r_big),
    }
}

/// `p̄(x) = ∫_0^x (y-1)/k(y)·e^{R(y-1)²} dy` (boundary degeneracy at 1).
pub fn pbar_weight(k: &DispersionCoefficient, r_big: f64, x: f64) -> Result<f64, WeightError> {
    require_regime(k, Regime::Boundary1)?;
    check_moment_integrable(k)?;
    k.eval(x)?;
    match k.profile() {
        Profile::PowerLaw { alpha } => Ok(power_series(1.0 - x, *alpha, r_big) - power_series(1.0, *alpha, r_big)),
        _ => Ok(moment_quadrature(k, 1.0, x, r_big)? - moment_quadrature(k, 1.0, 0.0, r_big)?),
    }
}

/// `∫_{x0}^x (y-x0)/k(y)·e^{R(y-x0)²} dy`.
fn interior_moment(k: &DispersionCoefficient, r_big: f64, x: f64) -> Result<f64, WeightError> {
    let x0 = k.x0().ok_or_else(|| WeightError::Parameter("interior weight needs x0".into()))?;
    check_moment_integrable(k)?;
    k.eval(x)?;
    match k.profile() {
        Profile::PowerLaw { alpha } => Ok(power_series((x - x0).abs(), *alpha, r_big)),
        _ => moment_quadrature(k, x0, x, r_big),
    }
}

fn require_regime(k: &DispersionCoefficient, regime: Regime) -> Result<(), WeightError> {
    if k.regime() != regime {
        return Err(WeightError::Parameter(format!("expected a {regime:?} coefficient, got {:?}", k.regime())));
    }
    Ok(())
}

/// Lower bound on `d2` for the interior weight, reading the degeneracy
/// constant in the denominator as `M`.
pub fn d2_lower_bound(k: &DispersionCoefficient, r_big: f64) -> Result<f64, WeightError> {
    let x0 = k.x0().ok_or_else(|| WeightError::Parameter("interior weight needs x0".into()))?;
    let m = k.m();
    if m >= 2.0 {
        return Err(WeightError::Hypothesis(format!("M = {m} ≥ 2")));
    }
    let right = (1.0 - x0).powi(2) * (r_big * (1.0 - x0).powi(2)).exp() / ((2.0 - m) * k.eval(1.0)?);
    let left = x0 * x0 * (r_big * x0 * x0).exp() / ((2.0 - m) * k.eval(0.0)?);
    Ok(right.max(left))
}

/// `γ(x) = d1 (∫_{x0}^x (y-x0)/k e^{R(y-x0)²} dy - d2)`.
pub fn gamma_interior(k: &DispersionCoefficient, params: &CarlemanParams, x: f64) -> Result<f64, WeightError> {
    if !k.regime().is_interior() {
        return Err(WeightError::Parameter(format!("interior weight on a {:?} coefficient", k.regime())));
    }
    let d2 = params.resolve_d2(k)?;
    Ok(params.d1 * (interior_moment(k, params.r_big, x)? - d2))
}

/// `Ψ(x) = e^{κσ(x)} - e^{2κ‖σ‖∞}`.
pub fn psi_nondeg(k: &DispersionCoefficient, kappa: f64, x: f64) -> Result<f64, WeightError> {
    let sup = sigma(k, 0.0)?;
    Ok((kappa * sigma(k, x)?).exp() - (2.0 * kappa * sup).exp())
}

/// `(Φ, φ) = (Θ·Ψ, Θ·e^{κσ})` for a nondegenerate coefficient.
pub fn phi_nondeg(
    t: f64,
    a: f64,
    x: f64,
    t_final: f64,
    params: &CarlemanParams,
    k: &DispersionCoefficient,
) -> Result<(f64, f64), WeightError> {
    let th = theta(t, a, t_final)?;
    Ok((th * psi_nondeg(k, params.kappa, x)?, th * (params.kappa * sigma(k, x)?).exp()))
}

/// `φ = Θ(p - 2‖p‖∞)` for degeneracy at 0, `Θ(p̄ - 2‖p̄‖∞)` at 1.
pub fn varphi(t: f64, a: f64, x: f64, t_final: f64, params: &CarlemanParams, k: &DispersionCoefficient) -> Result<f64, WeightError> {
    let th = theta(t, a, t_final)?;
    match k.regime() {
        Regime::Boundary0 => Ok(th * (p_weight(k, params.r_big, x)? - 2.0 * p_weight(k, params.r_big, 1.0)?)),
        Regime::Boundary1 => Ok(th * (pbar_weight(k, params.r_big, x)? - 2.0 * pbar_weight(k, params.r_big, 1.0)?.abs())),
        r => Err(WeightError::Parameter(format!("boundary weight on a {r:?} coefficient"))),
    }
}

/// `Ψ(x) = e^{rσ(x)} - 𝔠`.
pub fn psi_weak_a2(k: &DispersionCoefficient, params: &CarlemanParams, x: f64) -> Result<f64, WeightError> {
    let c = params.resolve_c_frak_a2(k)?;
    Ok((params.r * sigma(k, x)?).exp() - c)
}

/// `-r[g0 ∫_0^x (1-t)/√k dt + h0 ∫_0^x 1/√k dt] - 𝔠` with constant `𝔤 ≡ g0`, `𝔥 ≡ h0`.
pub fn psi_weak_a1(k: &DispersionCoefficient, params: &CarlemanParams, x: f64) -> Result<f64, WeightError> {
    k.eval(x)?;
    let c = params.c_frak.unwrap_or(1.0);
    if !(c > 0.0) {
        return Err(WeightError::Parameter(format!("𝔠 = {c} must be positive")));
    }
    let tol = Tolerance::default();
    let g = quadrature::integrate(|t| (1.0 - t) / k.k_unchecked(t).sqrt(), 0.0, x, tol)
        .map_err(|e| WeightError::Hypothesis(format!("∫ 1/√k diverges: {e}")))?;
    let h = quadrature::integrate(|t| 1.0 / k.k_unchecked(t).sqrt(), 0.0, x, tol)
        .map_err(|e| WeightError::Hypothesis(format!("∫ 1/√k diverges: {e}")))?;
    Ok(-params.r * (params.g0 * g + params.h0 * h) - c)
}

/// Parameters of the weight families. `s` has no default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanParams {
    pub s: f64,
    pub r_big: f64,
    pub kappa: f64,
    pub r: f64,
    pub d1: f64,
    /// `None` selects `1.01 ×` the lower bound.
    pub d2: Option<f64>,
    /// `None` selects the automatic offset.
    pub c_frak: Option<f64>,
    pub g0: f64,
    pub h0: f64,
}

impl CarlemanParams {
    pub fn new(s: f64) -> Self {
        Self { s, r_big: 1.0, kappa: 1.0, r: 1.0, d1: 1.0, d2: None, c_frak: None, g0: 1.0, h0: 1.0 }
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }

    fn check(&self) -> Result<(), WeightError> {
        for (name, v) in [("s", self.s), ("R", self.r_big), ("kappa", self.kappa), ("r", self.r), ("d1", self.d1), ("g0", self.g0), ("h0", self.h0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(WeightError::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn resolve_d2(&self, k: &DispersionCoefficient) -> Result<f64, WeightError> {
        let bound = d2_lower_bound(k, self.r_big)?;
        match self.d2 {
            None => Ok(1.01 * bound),
            Some(d2) if d2 > bound => Ok(d2),
            Some(d2) => Err(WeightError::Parameter(format!("d2 = {d2} does not exceed its lower bound {bound}"))),
        }
    }

    pub fn resolve_c_frak_a2(&self, k: &DispersionCoefficient) -> Result<f64, WeightError> {
        let sup = sigma(k, 0.0)?;
        let c_auto = (self.r * sup).exp() * (1.0 + 1e-6);
        match self.c_frak {
            None => Ok(c_auto),
            // Ψ attains its max at x = 0, where σ = ‖σ‖∞.
            Some(c) if (self.r * sup).exp() - c < 0.0 => Ok(c),
            Some(c) => Err(WeightError::Parameter(format!("𝔠 = {c} leaves max Ψ ≥ 0"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    PhiNonDeg,
    VarphiBoundary0,
    VarphiBoundary1,
    GammaInterior,
    PsiWeakA2,
    PsiWeakA1,
}

impl WeightKind {
    /// The weight matched to a coefficient regime.
    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::Boundary0 => WeightKind::VarphiBoundary0,
            Regime::Boundary1 => WeightKind::VarphiBoundary1,
            Regime::InteriorWeak | Regime::InteriorStrong => WeightKind::GammaInterior,
            Regime::NonDegenerate => WeightKind::PhiNonDeg,
        }
    }
}

/// A weight `Θ(t, a)·ψ(x)` with `ψ` cached on the space nodes.
#[derive(Debug, Clone)]
pub struct WeightField {
    kind: WeightKind,
    params: CarlemanParams,
    t_final: f64,
    profile: Vec<f64>,
}

impl WeightField {
    pub fn new(kind: WeightKind, params: CarlemanParams, k: &DispersionCoefficient, lattice: &Lattice) -> Result<Self, WeightError> {
        params.check()?;
        let xs = lattice.x_nodes();
        let profile: Vec<f64> = match kind {
            WeightKind::PhiNonDeg => xs.iter().map(|&x| psi_nondeg(k, params.kappa, x)).collect::<Result<_, _>>()?,
            WeightKind::VarphiBoundary0 => {
                let sup = p_weight(k, params.r_big, 1.0)?;
                xs.iter().map(|&x| Ok(p_weight(k, params.r_big, x)? - 2.0 * sup)).collect::<Result<_, WeightError>>()?
            }
            WeightKind::VarphiBoundary1 => {
                let sup = pbar_weight(k, params.r_big, 1.0)?.abs();
                xs.iter().map(|&x| Ok(pbar_weight(k, params.r_big, x)? - 2.0 * sup)).collect::<Result<_, WeightError>>()?
            }
            WeightKind::GammaInterior => xs.iter().map(|&x| gamma_interior(k, &params, x)).collect::<Result<_, _>>()?,
            WeightKind::PsiWeakA2 => xs.iter().map(|&x| psi_weak_a2(k, &params, x)).collect::<Result<_, _>>()?,
            WeightKind::PsiWeakA1 => xs.iter().map(|&x| psi_weak_a1(k, &params, x)).collect::<Result<_, _>>()?,
        };
        if let Some((i, v)) = profile.iter().enumerate().find(|(_, v)| !(**v < 0.0)) {
            return Err(WeightError::Parameter(format!("{kind:?} profile is not negative at x = {} ({v})", xs[i])));
        }
        Ok(Self { kind, params, t_final: lattice.t_final(), profile })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn params(&self) -> &CarlemanParams {
        &self.params
    }

    pub fn s(&self) -> f64 {
        self.params.s
    }

    /// Same profile, different `s`.
    pub fn with_s(&self, s: f64) -> Self {
        Self { params: self.params.with_s(s), ..self.clone() }
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    /// `max |ψ|` over the nodes.
    pub fn profile_sup(&self) -> f64 {
        self.profile.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Θ(t, a)·ψ(x_i)`.
    pub fn value(&self, t: f64, a: f64, i: usize) -> Result<f64, WeightError> {
        Ok(theta(t, a, self.t_final)? * self.profile[i])
    }

    /// `Θ^m·G·e^{2sΘψ(x_i)}` evaluated as one exponential. Returns 0 for
    /// `G = 0`, on underflow, and at the singular set `t ∈ {0, T}`, `a = 0`,
    /// where the product tends to 0.
    pub fn log_weighted_product(&self, m: i32, t: f64, a: f64, i: usize, g: f64) -> f64 {
        if g == 0.0 {
            return 0.0;
        }
        let Ok(lt) = log_theta(t, a, self.t_final) else {
            return 0.0;
        };
        let e = m as f64 * lt + g.abs().ln() + 2.0 * self.params.s * lt.exp() * self.profile[i];
        let v = e.exp();
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    }
}
