use super::carleman::{manufactured, x_derivative, SpaceTime};
use super::{Family, InequalityReport, VerifyError};
use crate::model::{ControlRegion, Problem};
use crate::weights::{CarlemanParams, WeightField, WeightKind};

fn nested(inner: &ControlRegion, outer: &ControlRegion) -> bool {
    inner.intervals().iter().all(|i| outer.intervals().iter().any(|o| o.lo < i.lo && i.hi < o.hi && i.lo < i.hi))
}

/// `Σ_{t,a,ω'} v_x² e^{2sψ} / (Σ_{t,a,ω} v² + Σ f² e^{2sψ})` on the
/// manufactured solution, `ψ` the weight matched to the regime and `s`
/// scaled as in the Carleman checks.
pub fn check_caccioppoli(problem: &Problem, omega_inner: &ControlRegion, omega: &ControlRegion, s_base: &[f64]) -> Result<InequalityReport, VerifyError> {
    let k = problem.k();
    omega.validate_compact()?;
    if !nested(omega_inner, omega) {
        return Err(VerifyError::Config("need omega' compactly inside omega".into()));
    }
    if let Some(x0) = k.x0() {
        if omega.contains_closed(x0) {
            return Err(VerifyError::Config(format!("x0 = {x0} must lie outside the closure of omega")));
        }
    }
    let l = problem.lattice();
    let base = WeightField::new(WeightKind::for_regime(k.regime()), CarlemanParams::new(1.0), k, l)?;
    let s_values = super::scaled_s_values(&base, problem.t_final(), problem.a_max(), s_base)?;
    let sol = manufactured(problem)?;
    let st = SpaceTime::new(problem);
    let inner_mask = omega_inner.mask(l);
    let outer_mask = omega.mask(l);

    let mut zero_order = 0.0;
    for n in st.levels.clone() {
        for j in st.rows.clone() {
            let acc: f64 = (0..l.nx()).filter(|&i| outer_mask[i]).map(|i| st.wx[i] * sol.v[n][[j, i]].powi(2)).sum();
            zero_order += st.dt * st.wa[j] * acc;
        }
    }
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for &s in &s_values {
        let field = base.with_s(s);
        let (mut left, mut source) = (0.0, 0.0);
        for n in st.levels.clone() {
            let t = l.t(n);
            for j in st.rows.clone() {
                let a = l.a(j);
                let row = sol.v[n].row(j);
                let vx = x_derivative(row.as_slice().expect("standard layout"), l.h());
                let (mut la, mut sa) = (0.0, 0.0);
                for i in 0..l.nx() {
                    if inner_mask[i] {
                        la += st.wx[i] * field.log_weighted_product(0, t, a, i, vx[i] * vx[i]);
                    }
                    sa += st.wx[i] * field.log_weighted_product(0, t, a, i, sol.f[n][[j, i]].powi(2));
                }
                left += st.dt * st.wa[j] * la;
                source += st.dt * st.wa[j] * sa;
            }
        }
        lhs.push(left);
        rhs.push(zero_order + source);
    }
    let report = InequalityReport::from_sides(Family::Caccioppoli, "s", s_values, lhs, rhs, l.tag());
    Ok(report.with_detail(format!("omega' = {:?}, omega = {:?}", omega_inner.intervals(), omega.intervals())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn nondegenerate_ratio_finite() {
        let p = scenarios::reference_nondegenerate(17, 16).unwrap();
        let r = check_caccioppoli(&p, &ControlRegion::single(0.4, 0.7), &ControlRegion::single(0.3, 0.8), &[1.0, 2.0, 4.0]).unwrap();
        assert!(r.pass, "{}", r.to_table());
        assert!(r.ratios.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn nesting_and_placement_enforced() {
        let p = scenarios::reference_nondegenerate(17, 16).unwrap();
        let err = check_caccioppoli(&p, &ControlRegion::single(0.2, 0.7), &ControlRegion::single(0.3, 0.8), &[1.0]);
        assert!(matches!(err, Err(VerifyError::Config(_))));
        let p = scenarios::reference_interior(17, 16).unwrap();
        let err = check_caccioppoli(&p, &ControlRegion::single(0.4, 0.45), &ControlRegion::single(0.3, 0.5), &[1.0]);
        assert!(matches!(err, Err(VerifyError::Config(_))));
        assert!(check_caccioppoli(&p, &ControlRegion::single(0.65, 0.75), &ControlRegion::single(0.6, 0.8), &[1.0]).is_ok());
    }
}
