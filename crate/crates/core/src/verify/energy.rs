use super::{Family, InequalityReport, VerifyError};
use crate::model::{Field, Problem};
use crate::pde::{solve_forward, Renewal, Scheme};

/// `N(t) = ‖u(t)‖²` along the uncontrolled zero-renewal solve over `[0, T]`.
/// Entry `n` compares `N(t_{n+1})` with `N(t_n)`; passes when no increment
/// exceeds `10⁻¹² N(0)`.
pub fn check_energy_decay(problem: &Problem, y0: &Field, scheme: Scheme) -> Result<InequalityReport, VerifyError> {
    let lattice = problem.lattice();
    let traj = solve_forward(problem, y0, None, 0, lattice.nt(), Renewal::Zero, scheme)?;
    let energies: Vec<f64> = traj.slices().iter().map(|s| problem.inner(s, s)).collect();
    let n0 = energies[0];
    let max_increment = energies.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let params = (1..energies.len()).map(|n| lattice.t(n)).collect();
    let mut report = InequalityReport::from_sides(
        Family::EnergyDecay,
        "t",
        params,
        energies[1..].to_vec(),
        energies[..energies.len() - 1].to_vec(),
        lattice.tag(),
    );
    report.pass = max_increment <= 1e-12 * n0.max(f64::MIN_POSITIVE);
    Ok(report.with_detail(format!("N(0) = {n0:.6e}, N(T) = {:.6e}, max increment {max_increment:.3e}", energies[energies.len() - 1])))
}
