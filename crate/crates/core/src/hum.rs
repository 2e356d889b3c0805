//! Null-control synthesis on the window `[T̃, T]` by conjugate gradient on the
//! penalized Gramian system.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Field, Problem};
use crate::pde::{solve_adjoint_transpose, solve_forward, PdeError, Renewal, Scheme, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HumError {
    #[error("invalid control configuration: {0}")]
    Config(String),
    #[error("invalid datum: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HumConfig {
    pub epsilon: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub scheme: Scheme,
}

impl Default for HumConfig {
    fn default() -> Self {
        Self { epsilon: 1e-8, cg_tol: 1e-8, cg_max_iters: 300, scheme: Scheme::ImplicitEuler }
    }
}

impl HumConfig {
    pub fn validate(&self) -> Result<(), HumError> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(HumError::Config(format!("epsilon = {} must be nonnegative", self.epsilon)));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(HumError::Config(format!("cg_tol = {} must lie in (0, 1)", self.cg_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ControlResult {
    /// One slice per time step of the whole horizon; zero before `T̃`.
    pub control: Vec<Field>,
    pub g_hat: Field,
    /// Controlled state from the first simulated level to `T`.
    pub trajectory: Trajectory,
    pub terminal_residual: f64,
    /// `‖y(T)‖` over ages below `δ`; reported, not controlled.
    pub residual_below_delta: f64,
    pub y0_norm: f64,
    pub control_norm: f64,
    pub ratio: f64,
    pub j_history: Vec<f64>,
    pub cg_iters: usize,
    pub cg_relative_residual: f64,
    pub converged: bool,
    pub phase1: Option<PhaseOneEnergy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseOneEnergy {
    pub initial_norm: f64,
    pub handover_norm: f64,
}

/// JSON-friendly part of a [`ControlResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSummary {
    pub terminal_residual: f64,
    pub relative_residual: f64,
    pub residual_below_delta: f64,
    pub y0_norm: f64,
    pub control_norm: f64,
    pub ratio: f64,
    pub cg_iters: usize,
    pub cg_relative_residual: f64,
    pub converged: bool,
    pub j_history: Vec<f64>,
    pub delta: f64,
    pub t_tilde: f64,
    pub phase1: Option<PhaseOneEnergy>,
}

impl ControlResult {
    pub fn summary(&self, problem: &Problem) -> ControlSummary {
        ControlSummary {
            terminal_residual: self.terminal_residual,
            relative_residual: if self.y0_norm > 0.0 { self.terminal_residual / self.y0_norm } else { 0.0 },
            residual_below_delta: self.residual_below_delta,
            y0_norm: self.y0_norm,
            control_norm: self.control_norm,
            ratio: self.ratio,
            cg_iters: self.cg_iters,
            cg_relative_residual: self.cg_relative_residual,
            converged: self.converged,
            j_history: self.j_history.clone(),
            delta: problem.delta(),
            t_tilde: problem.t_tilde(),
            phase1: self.phase1,
        }
    }
}

/// First time level of the control window.
pub fn window_start(problem: &Problem) -> usize {
    problem.t_tilde_step()
}

/// Zeroes `g` outside the target rows and off the active nodes.
pub fn restrict_to_target(problem: &Problem, g: &mut Field) {
    let rows = problem.target_rows();
    for (j, mut row) in g.rows_mut().into_iter().enumerate() {
        if !rows.contains(&j) {
            row.fill(0.0);
        }
    }
    problem.project_field(g);
}

fn check_target_datum(problem: &Problem, g: &Field) -> Result<Field, HumError> {
    let na = problem.lattice().na();
    if g.dim() != (na + 1, problem.lattice().nx()) {
        return Err(HumError::Data(format!("datum has shape {:?}", g.dim())));
    }
    if g.row(na).iter().any(|&v| v != 0.0) {
        return Err(HumError::Data("g must vanish at a = A".into()));
    }
    let mut g = g.clone();
    restrict_to_target(problem, &mut g);
    Ok(g)
}

/// Adjoint state on the window from terminal datum `g`.
pub fn adjoint_on_window(problem: &Problem, g: &Field, scheme: Scheme) -> Result<Trajectory, HumError> {
    let g = check_target_datum(problem, g)?;
    Ok(solve_adjoint_transpose(problem, &g, window_start(problem), Renewal::Integral, scheme)?)
}

/// `f^n = χ_ω v^{n+1}` on the window, zero elsewhere.
pub fn control_from_adjoint(problem: &Problem, v: &Trajectory) -> Vec<Field> {
    let nt = problem.lattice().nt();
    let mask = problem.omega_mask();
    (0..nt)
        .map(|n| {
            let mut f = problem.zero_field();
            if n >= v.first_level() && n < v.last_level() {
                f.assign(v.at(n + 1));
                for mut row in f.rows_mut() {
                    for (i, x) in row.iter_mut().enumerate() {
                        if !mask[i] {
                            *x = 0.0;
                        }
                    }
                }
            }
            f
        })
        .collect()
}

/// `Σ_n dt ⟨χ_ω v^{n+1}, v^{n+1}⟩` over the window.
pub fn observed_energy(problem: &Problem, v: &Trajectory) -> f64 {
    let dt = problem.lattice().dt();
    (v.first_level() + 1..=v.last_level()).map(|n| dt * problem.omega_inner(v.at(n), v.at(n))).sum()
}

/// `(Σ_n dt ‖f^n‖²)^{1/2}`.
pub fn control_norm(problem: &Problem, f: &[Field]) -> f64 {
    let dt = problem.lattice().dt();
    f.iter().map(|s| dt * problem.inner(s, s)).sum::<f64>().sqrt()
}

/// Terminal state of the uncontrolled window solve from `y0`, on the target.
pub fn free_terminal(problem: &Problem, y0: &Field, scheme: Scheme) -> Result<Field, HumError> {
    let traj = solve_forward(problem, y0, None, window_start(problem), problem.lattice().nt(), Renewal::Integral, scheme)?;
    let mut b = traj.terminal().clone();
    restrict_to_target(problem, &mut b);
    Ok(b)
}

/// `Λg`: target part of the terminal state driven from rest by `χ_ω v_g`.
pub fn gramian_apply(problem: &Problem, g: &Field, scheme: Scheme) -> Result<Field, HumError> {
    let v = adjoint_on_window(problem, g, scheme)?;
    let f = control_from_adjoint(problem, &v);
    let zero = problem.zero_field();
    let traj = solve_forward(problem, &zero, Some(&f), window_start(problem), problem.lattice().nt(), Renewal::Integral, scheme)?;
    let mut out = traj.terminal().clone();
    restrict_to_target(problem, &mut out);
    Ok(out)
}

/// `J(g) = ½ Σ dt ⟨χ_ω v_g, v_g⟩ + ⟨v_g(T̃), y0⟩`.
pub fn evaluate_j(problem: &Problem, g: &Field, y0: &Field, scheme: Scheme) -> Result<f64, HumError> {
    let v = adjoint_on_window(problem, g, scheme)?;
    Ok(0.5 * observed_energy(problem, &v) + problem.inner(v.initial(), y0))
}

/// `‖y(T)‖` over the target ages `δ ≤ a < A`.
pub fn verify_null(problem: &Problem, trajectory: &Trajectory) -> f64 {
    let y = trajectory.terminal();
    problem.target_inner(y, y).max(0.0).sqrt()
}

fn below_delta(problem: &Problem, y: &Field) -> f64 {
    let rows = 0..problem.target_rows().start;
    problem.weights().state_inner_rows(y.view(), y.view(), problem.lattice().da(), rows).max(0.0).sqrt()
}

fn axpy(y: &mut Field, a: f64, x: &Field) {
    y.scaled_add(a, x);
}

/// Solves `(Λ + εI) g = -b` by CG in the target inner product, then runs the
/// controlled forward problem on the window from `y0` (given at `T̃`).
pub fn synthesize_control(problem: &Problem, y0: &Field, config: &HumConfig) -> Result<ControlResult, HumError> {
    config.validate()?;
    let scheme = config.scheme;
    let n0 = window_start(problem);
    let nt = problem.lattice().nt();
    let mut y0 = y0.clone();
    problem.project_field(&mut y0);
    let b = free_terminal(problem, &y0, scheme)?;
    let b_norm = problem.target_inner(&b, &b).sqrt();

    let mut g = problem.zero_field();
    let mut r = b.mapv(|v| -v);
    let mut p = r.clone();
    let mut rr = problem.target_inner(&r, &r);
    let mut j_history = vec![0.0];
    let mut iters = 0;
    let mut converged = b_norm == 0.0;
    while !converged && iters < config.cg_max_iters {
        let mut q = gramian_apply(problem, &p, scheme)?;
        axpy(&mut q, config.epsilon, &p);
        let curvature = problem.target_inner(&p, &q);
        if !(curvature > 0.0) {
            return Err(HumError::Numerical(format!("CG breakdown: curvature {curvature:e} at iteration {iters}")));
        }
        let alpha = rr / curvature;
        axpy(&mut g, alpha, &p);
        axpy(&mut r, -alpha, &q);
        restrict_to_target(problem, &mut g);
        restrict_to_target(problem, &mut r);
        iters += 1;
        // J_ε(g) = ½⟨(Λ+ε)g, g⟩ + ⟨b, g⟩ = ½⟨b - r, g⟩ at a CG iterate.
        let mut br = b.clone();
        axpy(&mut br, -1.0, &r);
        j_history.push(0.5 * problem.target_inner(&br, &g));
        let rr_new = problem.target_inner(&r, &r);
        if rr_new.sqrt() <= config.cg_tol * b_norm {
            converged = true;
            rr = rr_new;
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p *= beta;
        axpy(&mut p, 1.0, &r);
    }
    let cg_relative_residual = if b_norm > 0.0 { rr.sqrt() / b_norm } else { 0.0 };

    let v = adjoint_on_window(problem, &g, scheme)?;
    let control = control_from_adjoint(problem, &v);
    let trajectory = solve_forward(problem, &y0, Some(&control), n0, nt, Renewal::Integral, scheme)?;
    let terminal_residual = verify_null(problem, &trajectory);
    let residual_below_delta = below_delta(problem, trajectory.terminal());
    let y0_norm = problem.norm(&y0);
    let cnorm = control_norm(problem, &control);
    Ok(ControlResult {
        control,
        g_hat: g,
        trajectory,
        terminal_residual,
        residual_below_delta,
        y0_norm,
        control_norm: cnorm,
        ratio: if y0_norm > 0.0 { cnorm / y0_norm } else { 0.0 },
        j_history,
        cg_iters: iters,
        cg_relative_residual,
        converged,
        phase1: None,
    })
}

/// Uncontrolled decay with zero renewal on `[0, T̃]`, then
/// [`synthesize_control`] on `[T̃, T]` from the handed-over state.
pub fn two_phase_control(problem: &Problem, y0: &Field, config: &HumConfig) -> Result<ControlResult, HumError> {
    let n0 = window_start(problem);
    if n0 == 0 || n0 >= problem.lattice().nt() {
        return Err(HumError::Config(format!("need 0 < T̃ < T, got T̃ = {}", problem.t_tilde())));
    }
    let phase1 = solve_forward(problem, y0, None, 0, n0, Renewal::Zero, Scheme::ImplicitEuler)?;
    let initial_norm = problem.norm(phase1.initial());
    let handover_norm = problem.norm(phase1.terminal());
    if handover_norm > initial_norm * (1.0 + 1e-12) {
        return Err(HumError::Numerical(format!(
            "phase-1 energy grew from {initial_norm:e} to {handover_norm:e}"
        )));
    }
    let mut result = synthesize_control(problem, phase1.terminal(), config)?;
    result.y0_norm = initial_norm;
    result.ratio = if initial_norm > 0.0 { result.control_norm / initial_norm } else { 0.0 };
    result.trajectory = phase1.concat(result.trajectory);
    result.phase1 = Some(PhaseOneEnergy { initial_norm, handover_norm });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn zero_datum_gives_zero_control() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        let r = synthesize_control(&p, &p.zero_field(), &HumConfig::default()).unwrap();
        assert_eq!(r.cg_iters, 0);
        assert_eq!(r.terminal_residual, 0.0);
        assert_eq!(r.control_norm, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = HumConfig::default();
        c.cg_tol = 1.0;
        assert!(c.validate().is_err());
        c.cg_tol = 1e-6;
        c.epsilon = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn g_must_vanish_at_max_age() {
        let p = scenarios::reference_boundary(17, 16).unwrap();
        let mut g = p.zero_field();
        g[[p.lattice().na(), 5]] = 1.0;
        assert!(matches!(evaluate_j(&p, &g, &p.zero_field(), Scheme::ImplicitEuler), Err(HumError::Data(_))));
    }
}
