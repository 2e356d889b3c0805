use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Family, InequalityReport, VerifyError};
use crate::model::{Field, Problem};
use crate::pde::{solve_adjoint_transpose, Renewal, Scheme};

const MODES: usize = 3;

/// `Σ_{p,q≤3} c_pq sin(pπ(a-δ)/(A-δ)) sin(qπx)` on `δ ≤ a ≤ A`, zero below
/// `δ`, with `c_pq` uniform in `(-1, 1)`. Vanishes at `a = A`.
pub fn smooth_terminal_datum<R: Rng>(problem: &Problem, rng: &mut R) -> Field {
    let l = problem.lattice();
    let (delta, a_max) = (problem.delta(), problem.a_max());
    let c: Vec<f64> = (0..MODES * MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v = problem.zero_field();
    for j in l.a_index_floor(delta)..l.na() {
        let u = (l.a(j) - delta) / (a_max - delta);
        for i in 0..l.nx() {
            let x = l.x(i);
            let mut s = 0.0;
            for p in 0..MODES {
                for q in 0..MODES {
                    s += c[p * MODES + q] * ((p + 1) as f64 * PI * u).sin() * ((q + 1) as f64 * PI * x).sin();
                }
            }
            v[[j, i]] = s;
        }
    }
    problem.project_field(&mut v);
    v
}

/// Per member: `‖v(T̃)‖² / Σ_n dt ⟨χ_ω v^n, v^n⟩` with the adjoint run over
/// the whole horizon. The effective constant is the ensemble maximum.
pub fn check_observability(problem: &Problem, ensemble_size: usize, seed: u64, scheme: Scheme) -> Result<InequalityReport, VerifyError> {
    if ensemble_size == 0 {
        return Err(VerifyError::Config("observability ensemble is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = problem.lattice();
    let n_tilde = problem.t_tilde_step();
    let (mut members, mut lhs, mut rhs) = (Vec::new(), Vec::new(), Vec::new());
    for member in 0..ensemble_size {
        let v_t = smooth_terminal_datum(problem, &mut rng);
        if problem.norm(&v_t) == 0.0 {
            continue;
        }
        let v = solve_adjoint_transpose(problem, &v_t, 0, Renewal::Integral, scheme)?;
        let at = v.at(n_tilde);
        let observed: f64 = (1..=l.nt()).map(|n| l.dt() * problem.omega_inner(v.at(n), v.at(n))).sum();
        members.push(member as f64);
        lhs.push(problem.inner(at, at));
        rhs.push(observed);
    }
    let report = InequalityReport::from_sides(Family::Observability, "member", members, lhs, rhs, l.tag());
    Ok(report.with_detail(format!("{ensemble_size} members, seed {seed}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ControlRegion;
    use crate::scenarios;

    #[test]
    fn datum_respects_support() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        let v = smooth_terminal_datum(&p, &mut ChaCha8Rng::seed_from_u64(1));
        let na = p.lattice().na();
        assert!(v.row(na).iter().all(|&x| x.abs() < 1e-12));
        for j in 0..p.lattice().a_index_floor(p.delta()) {
            assert!(v.row(j).iter().all(|&x| x == 0.0));
        }
        assert!(p.norm(&v) > 0.0);
    }

    #[test]
    fn empty_ensemble_rejected() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        assert!(matches!(check_observability(&p, 0, 1, Scheme::ImplicitEuler), Err(VerifyError::Config(_))));
    }

    #[test]
    fn larger_omega_does_not_raise_constant() {
        let p = scenarios::reference_boundary(33, 16).unwrap();
        let narrow = p.with_omega(ControlRegion::single(0.3, 0.6)).unwrap();
        let wide = p.with_omega(ControlRegion::single(0.2, 0.8)).unwrap();
        let rn = check_observability(&narrow, 8, 3, Scheme::ImplicitEuler).unwrap();
        let rw = check_observability(&wide, 8, 3, Scheme::ImplicitEuler).unwrap();
        assert!(rn.pass && rw.pass);
        assert!(rw.effective_constant <= rn.effective_constant);
    }
}
