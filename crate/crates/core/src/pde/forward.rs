use super::diffusion::{Scheme, SliceStepper};
use super::trajectory::{Trajectory, TrajectoryKind};
use super::{PdeError, Renewal};
use crate::model::{Field, Problem};

/// Per-slice propagators `P_{n,j}` of one problem, built on demand.
///
/// `μ` is sampled at age `a_j` (the age after the shift) and at the time
/// chosen by the scheme.
pub struct Stepper<'a> {
    problem: &'a Problem,
    scheme: Scheme,
    slice: SliceStepper,
    mu: Vec<f64>,
    trap: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a Problem, scheme: Scheme) -> Self {
        let nx = problem.lattice().nx();
        Self {
            problem,
            scheme,
            slice: SliceStepper::new(nx),
            mu: vec![0.0; nx],
            trap: problem.lattice().age_trapezoid(),
        }
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Trapezoid weights over the age nodes.
    pub fn trapezoid(&self) -> &[f64] {
        &self.trap
    }

    fn load(&mut self, n: usize, j: usize) {
        let lattice = self.problem.lattice();
        let dt = lattice.dt();
        let t = self.scheme.mu_time(lattice.t(n), dt);
        let a = lattice.a(j);
        let rates = self.problem.rates();
        for (i, m) in self.mu.iter_mut().enumerate() {
            *m = rates.mu(t, a, lattice.x(i));
        }
        self.slice.load(self.problem.weights(), &self.mu, lattice.h(), dt, self.scheme.theta());
    }

    /// `u ← P_{n,j} u`.
    pub fn propagate(&mut self, n: usize, j: usize, u: &mut [f64]) -> Result<(), PdeError> {
        self.load(n, j);
        self.slice.forward(u)
    }

    /// `v ← P_{n,j}^* v` in the weighted inner product.
    pub fn propagate_adjoint(&mut self, n: usize, j: usize, v: &mut [f64]) -> Result<(), PdeError> {
        self.load(n, j);
        self.slice.adjoint(v)
    }
}

/// One step `y^n ↦ y^{n+1}` with optional source slice `f^n`.
pub fn forward_step(stepper: &mut Stepper<'_>, y: &Field, n: usize, renewal: Renewal, f: Option<&Field>) -> Result<Field, PdeError> {
    let problem = stepper.problem();
    let na = problem.lattice().na();
    let dt = problem.lattice().dt();
    let mut z = problem.zero_field();
    for j in 1..=na {
        z.row_mut(j).assign(&y.row(j - 1));
    }
    if renewal == Renewal::Integral {
        let beta = problem.beta_grid();
        let trap = stepper.trapezoid();
        let mut newborn = vec![0.0; problem.lattice().nx()];
        for j in 1..=na {
            for (i, b) in newborn.iter_mut().enumerate() {
                *b += trap[j] * beta[[j, i]] * z[[j, i]];
            }
        }
        for (i, b) in newborn.into_iter().enumerate() {
            z[[0, i]] = b;
        }
    }
    for j in 0..=na {
        let mut row = z.row_mut(j);
        let u = row.as_slice_mut().expect("standard layout");
        stepper.propagate(n, j, u)?;
        if let Some(f) = f {
            for (i, v) in u.iter_mut().enumerate() {
                if problem.weights().is_active(i) {
                    *v += dt * f[[j, i]];
                }
            }
        }
    }
    Ok(z)
}

pub(crate) fn check_field(problem: &Problem, u: &Field, what: &str) -> Result<(), PdeError> {
    let shape = (problem.lattice().na() + 1, problem.lattice().nx());
    if u.dim() != shape {
        return Err(PdeError::Data(format!("{what} has shape {:?}, expected {shape:?}", u.dim())));
    }
    if let Some(v) = u.iter().find(|v| !v.is_finite()) {
        return Err(PdeError::Data(format!("{what} contains non-finite value {v}")));
    }
    Ok(())
}

/// Forward solve from level `n_start` to `n_end` starting at `y0`.
///
/// `f`, if given, holds one slice per time step of the whole horizon (slot
/// `n` drives the step `n → n + 1`).
pub fn solve_forward(
    problem: &Problem,
    y0: &Field,
    f: Option<&[Field]>,
    n_start: usize,
    n_end: usize,
    renewal: Renewal,
    scheme: Scheme,
) -> Result<Trajectory, PdeError> {
    let nt = problem.lattice().nt();
    if n_start > n_end || n_end > nt {
        return Err(PdeError::Config(format!("time window {n_start}..{n_end} outside 0..{nt}")));
    }
    check_field(problem, y0, "initial datum")?;
    if let Some(f) = f {
        if f.len() != nt {
            return Err(PdeError::Data(format!("source has {} slots, expected {nt}", f.len())));
        }
        for s in &f[n_start..n_end] {
            check_field(problem, s, "source")?;
        }
    }
    let mut y = y0.clone();
    problem.project_field(&mut y);
    let mut stepper = Stepper::new(problem, scheme);
    let mut slices = Vec::with_capacity(n_end - n_start + 1);
    slices.push(y);
    for n in n_start..n_end {
        let next = forward_step(&mut stepper, slices.last().expect("nonempty"), n, renewal, f.map(|f| &f[n]))?;
        slices.push(next);
    }
    Ok(Trajectory::new(TrajectoryKind::Forward, n_start, slices))
}
