use serde::Serialize;

use super::{DispersionCoefficient, Lattice, ModelError, Regime};

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub regime: Regime,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// In strict mode any failure is an error; otherwise failures are logged.
    pub fn enforce(&self, strict: bool) -> Result<(), ModelError> {
        if self.passed() {
            return Ok(());
        }
        let msg = self.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
        if strict {
            Err(ModelError::Hypothesis(msg))
        } else {
            log::warn!("structural hypotheses violated: {msg}");
            Ok(())
        }
    }
}

const REL_TOL: f64 = 1e-10;

/// Numerical probes of the structural assumptions on `k` at the lattice nodes.
pub fn validate_hypotheses(k: &DispersionCoefficient, lattice: &Lattice) -> ValidationReport {
    let regime = k.regime();
    let mut checks = Vec::new();
    if regime == Regime::NonDegenerate {
        let min = (0..lattice.nx()).map(|i| k.k_unchecked(lattice.x(i))).fold(f64::INFINITY, f64::min);
        checks.push(HypothesisCheck {
            name: "strict_positivity",
            passed: min > 0.0,
            detail: format!("min k on nodes = {min:e}"),
        });
        return ValidationReport { regime, checks };
    }

    let m = k.m();
    let (range_ok, range) = match regime {
        Regime::Boundary0 | Regime::Boundary1 => (m > 0.0 && m < 2.0, "(0, 2)"),
        Regime::InteriorWeak => (m > 0.0 && m < 1.0, "(0, 1)"),
        Regime::InteriorStrong => ((1.0..2.0).contains(&m), "[1, 2)"),
        Regime::NonDegenerate => unreachable!(),
    };
    checks.push(HypothesisCheck {
        name: "degeneracy_constant_range",
        passed: range_ok,
        detail: format!("M = {m}, required in {range}"),
    });

    let p = k.degeneracy_point().expect("degenerate regime");
    let ratios: Vec<(f64, f64)> = (0..lattice.nx())
        .map(|i| lattice.x(i))
        .filter(|&x| x != p)
        .map(|x| (x, (x - p) * k.dk_unchecked(x) / k.k_unchecked(x)))
        .collect();

    let positive = (0..lattice.nx()).map(|i| lattice.x(i)).filter(|&x| x != p).all(|x| k.k_unchecked(x) > 0.0);
    let zero_at_p = k.k_unchecked(p) == 0.0;
    checks.push(HypothesisCheck {
        name: "degeneracy_location",
        passed: positive && zero_at_p,
        detail: format!("k({p}) = {}, positive elsewhere on nodes: {positive}", k.k_unchecked(p)),
    });

    let worst = ratios.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    checks.push(HypothesisCheck {
        name: "pointwise_growth_bound",
        passed: ratios.iter().all(|&(_, r)| r.is_finite() && r <= m * (1.0 + REL_TOL) + REL_TOL),
        detail: format!("max (x-p)k'/k = {worst}, M = {m}"),
    });

    let lipschitz = ratios
        .windows(2)
        .filter(|w| (w[0].0 - p) * (w[1].0 - p) > 0.0)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    checks.push(HypothesisCheck {
        name: "ratio_lipschitz",
        passed: lipschitz.is_finite(),
        detail: format!("max |d/dx ((x-p)k'/k)| ≈ {lipschitz:e}"),
    });

    if regime == Regime::InteriorStrong {
        let found = (1..=64).map(|q| m * q as f64 / 64.0).find(|&theta| scaled_monotone(k, lattice, p, theta));
        checks.push(HypothesisCheck {
            name: "scaled_monotonicity",
            passed: found.is_some(),
            detail: match found {
                Some(theta) => format!("k/|x-x0|^θ monotone on both sides for θ = {theta}"),
                None => "no θ in (0, M] makes k/|x-x0|^θ monotone on both sides".into(),
            },
        });
    }
    ValidationReport { regime, checks }
}

fn scaled_monotone(k: &DispersionCoefficient, lattice: &Lattice, x0: f64, theta: f64) -> bool {
    let g = |x: f64| k.k_unchecked(x) / (x - x0).abs().powf(theta);
    let left: Vec<f64> = (0..lattice.nx()).map(|i| lattice.x(i)).filter(|&x| x < x0).map(g).collect();
    let right: Vec<f64> = (0..lattice.nx()).map(|i| lattice.x(i)).filter(|&x| x > x0).map(g).collect();
    let tol = |a: f64, b: f64| REL_TOL * a.abs().max(b.abs());
    left.windows(2).all(|w| w[1] <= w[0] + tol(w[0], w[1])) && right.windows(2).all(|w| w[1] + tol(w[0], w[1]) >= w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn lattice() -> Lattice {
        Lattice::new(65, 16, 1.0, 2.0).unwrap()
    }

    #[test]
    fn square_boundary_violates_range() {
        let k = DispersionCoefficient::boundary0(2.0).unwrap();
        let report = validate_hypotheses(&k, &lattice());
        assert!(!report.passed());
        assert!(report.failures().any(|c| c.name == "degeneracy_constant_range"));
        assert!(report.enforce(true).is_err());
        assert!(report.enforce(false).is_ok());
    }

    #[test]
    fn weak_interior_passes() {
        let k = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        let report = validate_hypotheses(&k, &lattice());
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn strong_interior_passes_with_monotonicity() {
        let k = DispersionCoefficient::interior(1.5, 0.5).unwrap();
        let report = validate_hypotheses(&k, &lattice());
        assert!(report.passed(), "{report:?}");
        assert!(report.checks.iter().any(|c| c.name == "scaled_monotonicity"));
    }

    #[test]
    fn nondegenerate_vacuous() {
        let k = DispersionCoefficient::affine(1.0, 1.0).unwrap();
        assert!(validate_hypotheses(&k, &lattice()).passed());
    }

    #[test]
    fn custom_violation_detected() {
        // (x-x0)k'/k = 0.8 > declared M = 0.5
        let k = DispersionCoefficient::custom(
            Regime::InteriorWeak,
            Some(0.5),
            0.5,
            Arc::new(|x: f64| (x - 0.5).abs().powf(0.8)),
            Arc::new(|x: f64| 0.8 * (x - 0.5).signum() * (x - 0.5).abs().powf(-0.2)),
        )
        .unwrap();
        let report = validate_hypotheses(&k, &lattice());
        assert!(report.failures().any(|c| c.name == "pointwise_growth_bound"));
    }
}
