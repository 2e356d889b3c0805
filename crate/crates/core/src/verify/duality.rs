use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::random::random_field;
use super::{Family, InequalityReport, VerifyError};
use crate::hum::{adjoint_on_window, restrict_to_target, window_start};
use crate::model::Problem;
use crate::pde::{solve_forward, Renewal, Scheme};

/// Residual of `⟨y(T), g⟩_{target} = ⟨y0, v_g(T̃)⟩ + Σ dt ⟨f, v_g⟩_ω` for
/// random `(y0, f, g)`. Trial 0 uses zero data, odd trials use `f = 0`.
pub fn check_duality(problem: &Problem, trials: usize, seed: u64, scheme: Scheme) -> Result<InequalityReport, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::Config("duality check needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice = problem.lattice();
    let (na, nt, dt) = (lattice.na(), lattice.nt(), lattice.dt());
    let n0 = window_start(problem);
    let mask = problem.omega_mask();
    let (mut params, mut lhs, mut rhs, mut residuals) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for trial in 0..trials {
        let zero = trial == 0;
        let y0 = if zero { problem.zero_field() } else { random_field(problem, &mut rng, 0..na) };
        let mut g = if zero { problem.zero_field() } else { random_field(problem, &mut rng, 0..na) };
        restrict_to_target(problem, &mut g);
        let f: Vec<_> = (0..nt)
            .map(|n| {
                let mut s = if zero || trial % 2 == 1 || n < n0 { problem.zero_field() } else { random_field(problem, &mut rng, 0..na) };
                for mut row in s.rows_mut() {
                    for (i, v) in row.iter_mut().enumerate() {
                        if !mask[i] {
                            *v = 0.0;
                        }
                    }
                }
                s
            })
            .collect();
        let y = solve_forward(problem, &y0, Some(&f), n0, nt, Renewal::Integral, scheme)?;
        let v = adjoint_on_window(problem, &g, scheme)?;
        let left = problem.target_inner(y.terminal(), &g);
        let mut right = problem.inner(&y0, v.initial());
        for n in n0..nt {
            right += dt * problem.omega_inner(&f[n], v.at(n + 1));
        }
        let scale = left.abs().max(right.abs());
        params.push(trial as f64);
        lhs.push(left.abs());
        rhs.push(right.abs());
        residuals.push(if scale == 0.0 { 0.0 } else { (left - right).abs() / scale });
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let mut report = InequalityReport::from_sides(Family::Duality, "trial", params, lhs, rhs, lattice.tag());
    report.ratios = residuals;
    report.effective_constant = worst;
    report.pass = worst <= 1e-10;
    Ok(report.with_detail(format!("max relative residual {worst:.3e} over {trials} trials")))
}
