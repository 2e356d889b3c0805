use super::{Family, InequalityReport, VerifyError};
use crate::model::DispersionCoefficient;

/// Exponents `γ` of the test family `v = x^γ (1 - x)`.
pub const HARDY_EXPONENTS: [f64; 7] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.55, 0.52];

/// `∫ v²/x² / ∫ v_x²` for `v = x^γ(1-x)`, `γ > 1/2`.
pub fn hardy_closed_form(gamma: f64) -> f64 {
    let num = 1.0 / (2.0 * gamma - 1.0) - 1.0 / gamma + 1.0 / (2.0 * gamma + 1.0);
    let den = gamma * gamma / (2.0 * gamma - 1.0) - (gamma + 1.0) + (gamma + 1.0).powi(2) / (2.0 * gamma + 1.0);
    num / den
}

/// Discrete Hardy quotients over the family on `n` uniform cells:
/// `Σ_{i≥1} h v_i²/x_i²` against `Σ_i h ((v_{i+1} - v_i)/h)²`. With a
/// coefficient, the weighted quotient `Σ h v_i²/k(x_i) / Σ h v_x²` is
/// reported in the detail. Passes when every quotient is at most `4·1.05`.
pub fn check_hardy(k: Option<&DispersionCoefficient>, n: usize) -> Result<InequalityReport, VerifyError> {
    if n < 2 {
        return Err(VerifyError::Config(format!("need at least 2 cells, got {n}")));
    }
    let h = 1.0 / n as f64;
    let (mut lhs, mut rhs, mut weighted) = (Vec::new(), Vec::new(), Vec::new());
    for &gamma in &HARDY_EXPONENTS {
        let x = |i: usize| if i == n { 1.0 } else { i as f64 * h };
        let v: Vec<f64> = (0..=n).map(|i| x(i).powf(gamma) * (1.0 - x(i))).collect();
        let num: f64 = (1..n).map(|i| h * v[i] * v[i] / (x(i) * x(i))).sum();
        let den: f64 = (0..n).map(|i| (v[i + 1] - v[i]).powi(2) / h).sum();
        lhs.push(num);
        rhs.push(den);
        if let Some(k) = k {
            let mut w = 0.0;
            for i in 1..n {
                let kx = k.eval(x(i))?;
                if kx > 0.0 {
                    w += h * v[i] * v[i] / kx;
                }
            }
            weighted.push(w / den);
        }
    }
    let mut report = InequalityReport::from_sides(Family::HardyPoincare, "gamma", HARDY_EXPONENTS.to_vec(), lhs, rhs, format!("{n}"));
    report.pass = report.pass && report.effective_constant <= 4.0 * 1.05;
    let mut detail = format!("sup ratio {:.6} against bound 4", report.effective_constant);
    if !weighted.is_empty() {
        let sup = weighted.iter().copied().fold(0.0, f64::max);
        detail.push_str(&format!("; weighted sup ratio {sup:.6}"));
        report.pass = report.pass && sup.is_finite();
    }
    Ok(report.with_detail(detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((hardy_closed_form(1.0) - 1.0).abs() < 1e-14);
        let mut last = 0.0;
        for &g in HARDY_EXPONENTS.iter() {
            let r = hardy_closed_form(g);
            assert!(r > last && r < 4.0);
            last = r;
        }
    }

    #[test]
    fn discrete_quotients_bounded_by_four() {
        for n in [64, 256, 1024] {
            let r = check_hardy(None, n).unwrap();
            assert!(r.pass, "{}", r.to_table());
            assert!((r.ratios[0] - 1.0).abs() < 0.01 + 2.0 / n as f64);
        }
    }

    #[test]
    fn converges_to_closed_form_for_smooth_member() {
        let r = check_hardy(None, 4096).unwrap();
        assert!((r.ratios[0] - 1.0).abs() < 1e-3);
        assert!((r.ratios[1] - hardy_closed_form(0.9)).abs() < 0.05);
    }
}
