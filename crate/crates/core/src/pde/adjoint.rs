use super::diffusion::Scheme;
use super::forward::{check_field, Stepper};
use super::trajectory::{Trajectory, TrajectoryKind};
use super::{PdeError, Renewal};
use crate::model::{Field, Problem};

/// Weighted adjoint of [`forward_step`](super::forward_step) without source:
/// `v^n = S^*(P_n^* v^{n+1})`, where `S^*` undoes the age shift and spreads
/// the newborn row back over the fertile ages.
pub fn adjoint_step(stepper: &mut Stepper<'_>, v_next: &Field, n: usize, renewal: Renewal) -> Result<Field, PdeError> {
    let problem = stepper.problem();
    let na = problem.lattice().na();
    let mut u = v_next.clone();
    for j in 0..=na {
        let mut row = u.row_mut(j);
        stepper.propagate_adjoint(n, j, row.as_slice_mut().expect("standard layout"))?;
    }
    let mut v = problem.zero_field();
    for m in 0..na {
        v.row_mut(m).assign(&u.row(m + 1));
    }
    if renewal == Renewal::Integral {
        let beta = problem.beta_grid();
        let trap = stepper.trapezoid();
        for m in 0..na {
            let c = trap[m + 1];
            for i in 0..problem.lattice().nx() {
                v[[m, i]] += c * beta[[m + 1, i]] * u[[0, i]];
            }
        }
    }
    Ok(v)
}

/// Backward solve from the terminal datum at `T` down to level `n_stop`,
/// exactly transposing the forward steps in the weighted inner product.
pub fn solve_adjoint_transpose(
    problem: &Problem,
    v_t: &Field,
    n_stop: usize,
    renewal: Renewal,
    scheme: Scheme,
) -> Result<Trajectory, PdeError> {
    let lattice = problem.lattice();
    let nt = lattice.nt();
    if n_stop > nt {
        return Err(PdeError::Config(format!("stop level {n_stop} beyond {nt}")));
    }
    check_field(problem, v_t, "terminal datum")?;
    if v_t.row(lattice.na()).iter().any(|&x| x != 0.0) {
        return Err(PdeError::Data("terminal datum must vanish at a = A".into()));
    }
    let mut v = v_t.clone();
    problem.project_field(&mut v);
    let mut stepper = Stepper::new(problem, scheme);
    let mut slices = vec![v];
    for n in (n_stop..nt).rev() {
        let prev = adjoint_step(&mut stepper, slices.last().expect("nonempty"), n, renewal)?;
        slices.push(prev);
    }
    slices.reverse();
    Ok(Trajectory::new(TrajectoryKind::AdjointTranspose, n_stop, slices))
}
