//! Bundled reference problems.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::verify::random_field;
use crate::model::{ControlRegion, DispersionCoefficient, Field, FertilityFn, Lattice, ModelError, Problem, Rates};

pub const T_FINAL: f64 = 1.0;
pub const A_MAX: f64 = 2.0;
pub const ABAR: f64 = 0.5;
pub const DELTA: f64 = 1.5;
pub const MU0: f64 = 0.1;

/// `amp·sin²(π(a-ā)/(A-ā))` on `(ā, A)`, zero elsewhere.
pub fn bump_fertility(amp: f64, abar: f64, a_max: f64) -> FertilityFn {
    Arc::new(move |a, _x| {
        if a > abar && a < a_max {
            amp * (PI * (a - abar) / (a_max - abar)).sin().powi(2)
        } else {
            0.0
        }
    })
}

pub fn reference_rates() -> Rates {
    Rates::new(Arc::new(|_, _, _| MU0), bump_fertility(1.0, ABAR, A_MAX), ABAR)
}

/// `k = x^{1/2}`, `ω = (0.3, 0.8)`.
pub fn reference_boundary(nx: usize, nt: usize) -> Result<Problem, ModelError> {
    Problem::new(
        DispersionCoefficient::boundary0(0.5)?,
        reference_rates(),
        ControlRegion::single(0.3, 0.8),
        Lattice::new(nx, nt, T_FINAL, A_MAX)?,
        DELTA,
    )
}

/// `k = (1 - x)^{1/2}`, `ω = (0.2, 0.7)`.
pub fn reference_boundary1(nx: usize, nt: usize) -> Result<Problem, ModelError> {
    Problem::new(
        DispersionCoefficient::boundary1(0.5)?,
        reference_rates(),
        ControlRegion::single(0.2, 0.7),
        Lattice::new(nx, nt, T_FINAL, A_MAX)?,
        DELTA,
    )
}

/// `k = |x - 1/2|^{1/2}`, `ω = (0.2, 0.4) ∪ (0.6, 0.8)`.
pub fn reference_interior(nx: usize, nt: usize) -> Result<Problem, ModelError> {
    Problem::new(
        DispersionCoefficient::interior(0.5, 0.5)?,
        reference_rates(),
        ControlRegion::split(0.2, 0.4, 0.6, 0.8),
        Lattice::new(nx, nt, T_FINAL, A_MAX)?,
        DELTA,
    )
}

/// `k = 1 + x`, `ω = (0.3, 0.8)`.
pub fn reference_nondegenerate(nx: usize, nt: usize) -> Result<Problem, ModelError> {
    Problem::new(
        DispersionCoefficient::affine(1.0, 1.0)?,
        reference_rates(),
        ControlRegion::single(0.3, 0.8),
        Lattice::new(nx, nt, T_FINAL, A_MAX)?,
        DELTA,
    )
}

/// `k = 1`, no births. Together with [`separable_exact`] this has a closed
/// form solution.
pub fn separable_problem(nx: usize, nt: usize) -> Result<Problem, ModelError> {
    Problem::new(
        DispersionCoefficient::constant(1.0)?,
        Rates::mortality_only(MU0, ABAR),
        ControlRegion::single(0.3, 0.8),
        Lattice::new(nx, nt, T_FINAL, A_MAX)?,
        DELTA,
    )
}

fn smooth_bump(s: f64, lo: f64, hi: f64) -> f64 {
    if s <= lo || s >= hi {
        return 0.0;
    }
    let u = 2.0 * (s - lo) / (hi - lo) - 1.0;
    (1.0 - 1.0 / (1.0 - u * u)).exp()
}

/// `b(a - t)·e^{-(π² + μ₀)t}·sin πx` with `b` a smooth bump on `(0.2, 1.2)`;
/// solves the uncontrolled problem of [`separable_problem`].
pub fn separable_exact(t: f64, a: f64, x: f64) -> f64 {
    smooth_bump(a - t, 0.2, 1.2) * (-(PI * PI + MU0) * t).exp() * (PI * x).sin()
}

/// [`separable_exact`] at time `t` on the lattice.
pub fn separable_field(problem: &Problem, t: f64) -> Field {
    let l = problem.lattice();
    let mut y = Array2::from_shape_fn((l.na() + 1, l.nx()), |(j, i)| separable_exact(t, l.a(j), l.x(i)));
    problem.project_field(&mut y);
    y
}

/// `exp(-(a-c)²/(2w²))·sin(πx)`, zeroed off the active nodes.
pub fn gaussian_datum(problem: &Problem, center: f64, width: f64) -> Field {
    let lattice = problem.lattice();
    let mut y = Array2::from_shape_fn((lattice.na() + 1, lattice.nx()), |(j, i)| {
        let a = lattice.a(j);
        (-(a - center).powi(2) / (2.0 * width * width)).exp() * (PI * lattice.x(i)).sin()
    });
    problem.project_field(&mut y);
    y
}

/// Uniform `(-1, 1)` values on every active node, seeded.
pub fn random_datum(problem: &Problem, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field(problem, &mut rng, 0..problem.lattice().na() + 1)
}

/// The smooth initial datum used by the control tests.
pub fn reference_datum(problem: &Problem) -> Field {
    gaussian_datum(problem, 1.2, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fertility_vanishes_before_onset() {
        let b = bump_fertility(1.0, 0.5, 2.0);
        assert_eq!(b(0.3, 0.5), 0.0);
        assert_eq!(b(0.5, 0.5), 0.0);
        assert!((b(1.25, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_problems_build() {
        let p = reference_boundary(65, 64).unwrap();
        assert_eq!(p.lattice().na(), 128);
        assert_eq!(p.delta(), 1.5);
        let p = reference_interior(65, 64).unwrap();
        assert!(p.weights().is_active(32));
        reference_nondegenerate(17, 16).unwrap();
    }
}
