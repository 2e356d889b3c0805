use serde::Serialize;

use super::diffusion::Scheme;
use super::forward::{check_field, Stepper};
use super::trajectory::{Trajectory, TrajectoryKind};
use super::PdeError;
use crate::model::{Field, Problem};

const TRACE_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 50;

/// Diagnostics of the characteristics solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicsReport {
    pub sweeps: usize,
    pub trace_change: f64,
    /// Cells with `t ≥ T̃ + a`, reached by pure propagation of the terminal datum.
    pub direct_cells: usize,
    /// Cells where the Duhamel upper limit is `ā`.
    pub abar_cells: usize,
    /// Cells where the upper limit is `A - a + t - T̃`.
    pub boundary_cells: usize,
    /// Cells where both limits coincide on the lattice.
    pub tie_cells: usize,
}

/// Adjoint solve along the lines `t - a = const`.
///
/// Each line is marched backward from where it leaves the domain: the
/// terminal datum if it reaches `t = T`, zero if it reaches `a = A` first.
/// A segment from `(n+1, j+1)` to `(n, j)` applies
/// `w ← P w + (dt/2)(β_j v(t_n, 0) + P β_{j+1} v(t_{n+1}, 0))`.
/// The newborn trace `v(·, 0, ·)` is lagged and updated by sweeps until it
/// stops changing.
pub fn characteristics_adjoint(problem: &Problem, v_t: &Field, n_stop: usize, scheme: Scheme) -> Result<(Trajectory, CharacteristicsReport), PdeError> {
    let lattice = problem.lattice();
    let (nt, na, nx) = (lattice.nt(), lattice.na(), lattice.nx());
    if n_stop > nt {
        return Err(PdeError::Config(format!("stop level {n_stop} beyond {nt}")));
    }
    check_field(problem, v_t, "terminal datum")?;
    if v_t.row(na).iter().any(|&x| x != 0.0) {
        return Err(PdeError::Data("terminal datum must vanish at a = A".into()));
    }
    let mut terminal = v_t.clone();
    problem.project_field(&mut terminal);

    let beta = problem.beta_grid();
    let fertile = beta.iter().any(|&b| b != 0.0);
    let half = 0.5 * lattice.dt();
    let mut stepper = Stepper::new(problem, scheme);
    let levels = nt - n_stop + 1;
    let mut trace = vec![vec![0.0; nx]; levels];
    trace[levels - 1] = terminal.row(0).to_vec();

    let mut sweeps = 0;
    let mut change: f64;
    let mut slices;
    loop {
        sweeps += 1;
        slices = vec![problem.zero_field(); levels];
        slices[levels - 1] = terminal.clone();
        let mut w = vec![0.0; nx];
        for n in (n_stop..nt).rev() {
            let k = n - n_stop;
            for j in 0..na {
                for i in 0..nx {
                    w[i] = slices[k + 1][[j + 1, i]] + half * beta[[j + 1, i]] * trace[k + 1][i];
                }
                stepper.propagate_adjoint(n, j + 1, &mut w)?;
                for i in 0..nx {
                    slices[k][[j, i]] = w[i] + half * beta[[j, i]] * trace[k][i];
                }
            }
            problem.project_field(&mut slices[k]);
        }
        if !fertile {
            change = 0.0;
            break;
        }
        let mut scale = 1.0f64;
        change = 0.0;
        for (k, tr) in trace.iter_mut().enumerate() {
            for (i, t) in tr.iter_mut().enumerate() {
                let new = slices[k][[0, i]];
                change = change.max((new - *t).abs());
                scale = scale.max(new.abs());
                *t = new;
            }
        }
        change /= scale;
        if change <= TRACE_TOL {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(PdeError::Numerical(format!(
                "newborn trace did not settle after {sweeps} sweeps (last relative change {change:e})"
            )));
        }
    }

    let (mut direct_cells, mut abar_cells, mut boundary_cells, mut tie_cells) = (0, 0, 0, 0);
    let abar = problem.abar();
    let t_tilde = problem.t_tilde();
    for n in n_stop..=nt {
        let t = lattice.t(n);
        for j in 0..=na {
            let a = lattice.a(j);
            if t >= t_tilde + a - 1e-12 {
                direct_cells += 1;
                continue;
            }
            let limit = lattice.a_max() - a + t - t_tilde;
            if (limit - abar).abs() <= 1e-12 * abar.max(1.0) {
                tie_cells += 1;
            } else if abar < limit {
                abar_cells += 1;
            } else {
                boundary_cells += 1;
            }
        }
    }
    let report = CharacteristicsReport { sweeps, trace_change: change, direct_cells, abar_cells, boundary_cells, tie_cells };
    Ok((Trajectory::new(TrajectoryKind::AdjointCharacteristics, n_stop, slices), report))
}
