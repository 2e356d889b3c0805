use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::observability::smooth_terminal_datum;
use super::{Family, InequalityReport, VerifyError};
use crate::model::{Field, Problem, Regime};
use crate::pde::{solve_adjoint_transpose, Renewal, Scheme};
use crate::weights::{sigma, theta, CarlemanParams, WeightField, WeightKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlemanVariant {
    Boundary0,
    Boundary1,
    Interior,
    NonDegenerate,
    /// Nondegenerate coefficient with the exponential-offset weight.
    NonDegenerateA2,
}

impl CarlemanVariant {
    pub const GLOBAL: [CarlemanVariant; 4] =
        [CarlemanVariant::Boundary0, CarlemanVariant::Boundary1, CarlemanVariant::Interior, CarlemanVariant::NonDegenerate];

    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::Boundary0 => CarlemanVariant::Boundary0,
            Regime::Boundary1 => CarlemanVariant::Boundary1,
            Regime::InteriorWeak | Regime::InteriorStrong => CarlemanVariant::Interior,
            Regime::NonDegenerate => CarlemanVariant::NonDegenerate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CarlemanVariant::Boundary0 => "boundary0",
            CarlemanVariant::Boundary1 => "boundary1",
            CarlemanVariant::Interior => "interior",
            CarlemanVariant::NonDegenerate => "nondegenerate",
            CarlemanVariant::NonDegenerateA2 => "nondegenerate_a2",
        }
    }

    fn weight_kind(self) -> WeightKind {
        match self {
            CarlemanVariant::Boundary0 => WeightKind::VarphiBoundary0,
            CarlemanVariant::Boundary1 => WeightKind::VarphiBoundary1,
            CarlemanVariant::Interior => WeightKind::GammaInterior,
            CarlemanVariant::NonDegenerate => WeightKind::PhiNonDeg,
            CarlemanVariant::NonDegenerateA2 => WeightKind::PsiWeakA2,
        }
    }

    fn family(self) -> Family {
        match self {
            CarlemanVariant::Boundary0 => Family::CarlemanGlobalBoundary0,
            CarlemanVariant::Boundary1 => Family::CarlemanGlobalBoundary1,
            CarlemanVariant::Interior => Family::CarlemanGlobalInterior,
            CarlemanVariant::NonDegenerate => Family::CarlemanNonDeg,
            CarlemanVariant::NonDegenerateA2 => Family::CarlemanNonDegWeak,
        }
    }

    fn check(self, problem: &Problem) -> Result<(), VerifyError> {
        let regime = problem.k().regime();
        let ok = match self {
            CarlemanVariant::NonDegenerate | CarlemanVariant::NonDegenerateA2 => regime == Regime::NonDegenerate,
            v => v == CarlemanVariant::for_regime(regime),
        };
        if ok {
            Ok(())
        } else {
            Err(VerifyError::Config(format!("variant {} does not apply to a {regime:?} coefficient", self.name())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlemanSource {
    /// Closed-form `v` with its exact source.
    Manufactured,
    /// Discrete adjoint solve from a smooth terminal datum, source `-β v(t,0,x)`.
    AdjointSolve,
}

/// Adjoint solution and source on every time level.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub v: Vec<Field>,
    pub f: Vec<Field>,
}

/// `v = t(T-t)·a·m(x)` with `m = sin πx`, times `(x - x0)` for an
/// interior degeneracy, and `f = v_t + v_a + k v_xx - μ v`. The birth term
/// drops out because `v(t, 0, ·) = 0`.
pub fn manufactured(problem: &Problem) -> Result<Manufactured, VerifyError> {
    let lattice = problem.lattice();
    let t_final = lattice.t_final();
    let x0 = problem.k().x0();
    let m = |x: f64| -> (f64, f64) {
        let (s, c) = (PI * x).sin_cos();
        match x0 {
            None => (s, -PI * PI * s),
            Some(x0) => (s * (x - x0), -PI * PI * s * (x - x0) + 2.0 * PI * c),
        }
    };
    let nx = lattice.nx();
    let mut profile = Vec::with_capacity(nx);
    for i in 0..nx {
        let x = lattice.x(i);
        let (mv, mxx) = m(x);
        profile.push((x, mv, mxx, problem.k().eval(x)?));
    }
    let (mut v, mut f) = (Vec::new(), Vec::new());
    for n in 0..=lattice.nt() {
        let t = lattice.t(n);
        let (tt, tt_t) = (t * (t_final - t), t_final - 2.0 * t);
        let mut vn = problem.zero_field();
        let mut fn_ = problem.zero_field();
        for j in 0..=lattice.na() {
            let a = lattice.a(j);
            for (i, &(x, mv, mxx, kx)) in profile.iter().enumerate() {
                let val = tt * a * mv;
                vn[[j, i]] = val;
                fn_[[j, i]] = tt_t * a * mv + tt * mv + kx * tt * a * mxx - problem.rates().mu(t, a, x) * val;
            }
        }
        v.push(vn);
        f.push(fn_);
    }
    Ok(Manufactured { v, f })
}

fn adjoint_solution(problem: &Problem) -> Result<Manufactured, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let v_t = smooth_terminal_datum(problem, &mut rng);
    let traj = solve_adjoint_transpose(problem, &v_t, 0, Renewal::Integral, Scheme::CrankNicolson)?;
    let beta = problem.beta_grid();
    let v = traj.into_slices();
    let f = v
        .iter()
        .map(|vn| {
            let mut f = problem.zero_field();
            for ((j, i), out) in f.indexed_iter_mut() {
                *out = -beta[[j, i]] * vn[[0, i]];
            }
            f
        })
        .collect();
    Ok(Manufactured { v, f })
}

fn solution(problem: &Problem, source: CarlemanSource) -> Result<Manufactured, VerifyError> {
    match source {
        CarlemanSource::Manufactured => manufactured(problem),
        CarlemanSource::AdjointSolve => adjoint_solution(problem),
    }
}

/// `base / max_x |W(T/2, A, x)|`. The slice `(T/2, A)` is where `Θ` is
/// smallest, so the scaling does not depend on the lattice.
pub fn scaled_s_values(field: &WeightField, t_final: f64, a_max: f64, base: &[f64]) -> Result<Vec<f64>, VerifyError> {
    let peak = theta(0.5 * t_final, a_max, t_final)? * field.profile_sup();
    Ok(base.iter().map(|b| b / peak).collect())
}

/// `v_x` by centered differences inside and second-order one-sided
/// differences at the endpoints.
pub(crate) fn x_derivative(row: &[f64], h: f64) -> Vec<f64> {
    let n = row.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (row[i + 1] - row[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h);
    d[n - 1] = (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h);
    d
}

/// Space-time nodes used by the sums: every time level except `0` and `N`,
/// every age row except `a = 0`, trapezoid weights in `a` and `x`.
pub(crate) struct SpaceTime {
    pub levels: std::ops::Range<usize>,
    pub rows: std::ops::RangeInclusive<usize>,
    pub wa: Vec<f64>,
    pub wx: Vec<f64>,
    pub dt: f64,
}

impl SpaceTime {
    pub fn new(problem: &Problem) -> Self {
        let l = problem.lattice();
        let (na, nx) = (l.na(), l.nx());
        let wa = (0..=na).map(|j| if j == na { 0.5 * l.da() } else { l.da() }).collect();
        let wx = (0..nx).map(|i| if i == 0 || i == nx - 1 { 0.5 * l.h() } else { l.h() }).collect();
        Self { levels: 1..l.nt(), rows: 1..=na, wa, wx, dt: l.dt() }
    }
}

struct Factors {
    g1: Vec<f64>,
    g2: Vec<f64>,
    inv_k: Vec<f64>,
    boundary: Vec<(usize, f64)>,
}

fn factors(variant: CarlemanVariant, problem: &Problem, params: &CarlemanParams) -> Result<Factors, VerifyError> {
    let l = problem.lattice();
    let k = problem.k();
    let nx = l.nx();
    let mut g1 = vec![1.0; nx];
    let mut g2 = vec![0.0; nx];
    let mut inv_k = vec![0.0; nx];
    let x0 = k.x0().unwrap_or(0.0);
    for i in 0..nx {
        let x = l.x(i);
        let kx = k.eval(x)?;
        if kx > 0.0 {
            inv_k[i] = 1.0 / kx;
        }
        g2[i] = match variant {
            CarlemanVariant::Boundary0 => (x * inv_k[i]).powi(2),
            CarlemanVariant::Boundary1 => ((1.0 - x) * inv_k[i]).powi(2),
            CarlemanVariant::Interior => ((x - x0) * inv_k[i]).powi(2),
            CarlemanVariant::NonDegenerate | CarlemanVariant::NonDegenerateA2 => {
                let rate = if variant == CarlemanVariant::NonDegenerate { params.kappa } else { params.r };
                let e = (rate * sigma(k, x)?).exp();
                g1[i] = e;
                inv_k[i] = 1.0;
                e.powi(3)
            }
        };
    }
    let last = nx - 1;
    let boundary = match variant {
        CarlemanVariant::Boundary0 => vec![(last, 1.0)],
        CarlemanVariant::Boundary1 => vec![(0, 1.0)],
        CarlemanVariant::Interior => vec![(0, params.d1 * x0), (last, params.d1 * (1.0 - x0))],
        CarlemanVariant::NonDegenerate | CarlemanVariant::NonDegenerateA2 => {
            let rate = if variant == CarlemanVariant::NonDegenerate { params.kappa } else { params.r };
            vec![(0, rate * k.eval(0.0)? * g1[0]), (last, rate * k.eval(1.0)? * g1[last])]
        }
    };
    Ok(Factors { g1, g2, inv_k, boundary })
}

/// Weighted `Σ (sΘ G₁ v_x² + s³Θ³ G₂ v²) e^{2sW}`.
fn carleman_lhs(field: &WeightField, problem: &Problem, sol: &Manufactured, fac: &Factors, st: &SpaceTime) -> f64 {
    let l = problem.lattice();
    let s = field.s();
    let mut total = 0.0;
    for n in st.levels.clone() {
        let t = l.t(n);
        for j in st.rows.clone() {
            let a = l.a(j);
            let row = sol.v[n].row(j);
            let row = row.as_slice().expect("standard layout");
            let vx = x_derivative(row, l.h());
            let mut acc = 0.0;
            for i in 0..row.len() {
                acc += st.wx[i]
                    * (s * field.log_weighted_product(1, t, a, i, fac.g1[i] * vx[i] * vx[i])
                        + s.powi(3) * field.log_weighted_product(3, t, a, i, fac.g2[i] * row[i] * row[i]));
            }
            total += st.dt * st.wa[j] * acc;
        }
    }
    total
}

/// `Σ f² e^{2sW}/k`, or the unweighted `Σ f²/k` when `weighted` is false.
fn source_term(field: &WeightField, problem: &Problem, sol: &Manufactured, fac: &Factors, st: &SpaceTime, weighted: bool) -> f64 {
    let l = problem.lattice();
    let mut total = 0.0;
    for n in st.levels.clone() {
        let t = l.t(n);
        for j in st.rows.clone() {
            let a = l.a(j);
            let mut acc = 0.0;
            for i in 0..l.nx() {
                let g = sol.f[n][[j, i]].powi(2) * fac.inv_k[i];
                acc += st.wx[i] * if weighted { field.log_weighted_product(0, t, a, i, g) } else { g };
            }
            total += st.dt * st.wa[j] * acc;
        }
    }
    total
}

fn boundary_term(field: &WeightField, problem: &Problem, sol: &Manufactured, fac: &Factors, st: &SpaceTime) -> f64 {
    let l = problem.lattice();
    let s = field.s();
    let mut total = 0.0;
    for n in st.levels.clone() {
        let t = l.t(n);
        for j in st.rows.clone() {
            let a = l.a(j);
            let row = sol.v[n].row(j);
            let vx = x_derivative(row.as_slice().expect("standard layout"), l.h());
            let acc: f64 = fac.boundary.iter().map(|&(i, c)| s * field.log_weighted_product(1, t, a, i, c * vx[i] * vx[i])).sum();
            total += st.dt * st.wa[j] * acc;
        }
    }
    total
}

/// `Σ_{t,a,ω} v²/k`.
pub(crate) fn omega_term(v: &[Field], st: &SpaceTime, inv_k: &[f64], mask: &[bool]) -> f64 {
    let mut total = 0.0;
    for n in st.levels.clone() {
        for j in st.rows.clone() {
            let acc: f64 = (0..mask.len()).filter(|&i| mask[i]).map(|i| st.wx[i] * v[n][[j, i]].powi(2) * inv_k[i]).sum();
            total += st.dt * st.wa[j] * acc;
        }
    }
    total
}

fn weight_for(variant: CarlemanVariant, problem: &Problem) -> Result<WeightField, VerifyError> {
    let params = CarlemanParams::new(1.0);
    Ok(WeightField::new(variant.weight_kind(), params, problem.k(), problem.lattice())?)
}

/// Global estimate: weighted energy against the weighted source plus the
/// variant's boundary flux, one entry per scaled `s`.
pub fn check_carleman_global(
    variant: CarlemanVariant,
    problem: &Problem,
    source: CarlemanSource,
    s_base: &[f64],
) -> Result<InequalityReport, VerifyError> {
    variant.check(problem)?;
    let base_field = weight_for(variant, problem)?;
    let s_values = scaled_s_values(&base_field, problem.t_final(), problem.a_max(), s_base)?;
    let sol = solution(problem, source)?;
    let fac = factors(variant, problem, base_field.params())?;
    let st = SpaceTime::new(problem);
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for &s in &s_values {
        let field = base_field.with_s(s);
        lhs.push(carleman_lhs(&field, problem, &sol, &fac, &st));
        rhs.push(source_term(&field, problem, &sol, &fac, &st, true) + boundary_term(&field, problem, &sol, &fac, &st));
    }
    let report = InequalityReport::from_sides(variant.family(), "s", s_values, lhs, rhs, problem.lattice().tag());
    Ok(report.with_detail(format!("variant {}, source {source:?}", variant.name())))
}

/// Local estimate: the boundary flux is replaced by `Σ_{t,a,ω} v²/k`. For an
/// interior degeneracy the source term is unweighted.
pub fn check_carleman_local(
    variant: CarlemanVariant,
    problem: &Problem,
    source: CarlemanSource,
    s_base: &[f64],
) -> Result<InequalityReport, VerifyError> {
    if matches!(variant, CarlemanVariant::NonDegenerate | CarlemanVariant::NonDegenerateA2) {
        return Err(VerifyError::Config("the local estimate is stated for degenerate coefficients".into()));
    }
    variant.check(problem)?;
    let base_field = weight_for(variant, problem)?;
    let s_values = scaled_s_values(&base_field, problem.t_final(), problem.a_max(), s_base)?;
    let sol = solution(problem, source)?;
    let fac = factors(variant, problem, base_field.params())?;
    let st = SpaceTime::new(problem);
    let observed = omega_term(&sol.v, &st, &fac.inv_k, problem.omega_mask());
    let weighted = variant != CarlemanVariant::Interior;
    let unweighted_source = if weighted { 0.0 } else { source_term(&base_field, problem, &sol, &fac, &st, false) };
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for &s in &s_values {
        let field = base_field.with_s(s);
        lhs.push(carleman_lhs(&field, problem, &sol, &fac, &st));
        let src = if weighted { source_term(&field, problem, &sol, &fac, &st, true) } else { unweighted_source };
        rhs.push(src + observed);
    }
    let report = InequalityReport::from_sides(Family::CarlemanLocal, "s", s_values, lhs, rhs, problem.lattice().tag());
    Ok(report.with_detail(format!("variant {}, source {source:?}, omega term {observed:.6e}", variant.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn variant_must_match_regime() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        assert!(matches!(
            check_carleman_global(CarlemanVariant::Interior, &p, CarlemanSource::Manufactured, &[1.0]),
            Err(VerifyError::Config(_))
        ));
        assert!(check_carleman_local(CarlemanVariant::NonDegenerate, &p, CarlemanSource::Manufactured, &[1.0]).is_err());
    }

    #[test]
    fn one_sided_derivative_is_exact_on_quadratics() {
        let h = 0.1;
        let row: Vec<f64> = (0..6).map(|i| (i as f64 * h).powi(2)).collect();
        let d = x_derivative(&row, h);
        for (i, di) in d.iter().enumerate() {
            assert!((di - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn manufactured_source_is_consistent() {
        // discrete adjoint residual of the manufactured pair shrinks under refinement
        let residual = |nx: usize, nt: usize| {
            let p = scenarios::reference_nondegenerate(nx, nt).unwrap();
            let l = p.lattice();
            let m = manufactured(&p).unwrap();
            let (dt, h) = (l.dt(), l.h());
            let mut worst: f64 = 0.0;
            for n in 0..l.nt() {
                for j in 0..l.na() {
                    for i in 1..l.nx() - 1 {
                        let x = l.x(i);
                        let v = &m.v;
                        let lap = (v[n][[j, i + 1]] - 2.0 * v[n][[j, i]] + v[n][[j, i - 1]]) / (h * h);
                        let r = (v[n + 1][[j + 1, i]] - v[n][[j, i]]) / dt + p.k().eval(x).unwrap() * lap
                            - p.rates().mu(l.t(n), l.a(j), x) * v[n][[j, i]];
                        worst = worst.max((r - m.f[n][[j, i]]).abs());
                    }
                }
            }
            worst
        };
        let (c, f) = (residual(17, 16), residual(33, 32));
        assert!(f < 0.6 * c, "{c} {f}");
    }

    #[test]
    fn zero_solution_gives_zero_ratio() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        let field = weight_for(CarlemanVariant::Boundary0, &p).unwrap();
        let fac = factors(CarlemanVariant::Boundary0, &p, field.params()).unwrap();
        let st = SpaceTime::new(&p);
        let zero = Manufactured { v: vec![p.zero_field(); 17], f: vec![p.zero_field(); 17] };
        assert_eq!(carleman_lhs(&field, &p, &zero, &fac, &st), 0.0);
        assert_eq!(source_term(&field, &p, &zero, &fac, &st, true), 0.0);
    }

    #[test]
    fn nondegenerate_ratio_finite() {
        let p = scenarios::reference_nondegenerate(17, 16).unwrap();
        let r = check_carleman_global(CarlemanVariant::NonDegenerate, &p, CarlemanSource::Manufactured, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(r.pass, "{}", r.to_table());
        assert!(r.effective_constant > 0.0);
    }
}
