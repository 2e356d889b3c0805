//! Forward and adjoint solvers on the aligned lattice.
//!
//! One forward step from level `n` to `n + 1` is: shift every age row up by
//! one node (the row leaving at `a = A` is dropped), refill the `a = 0` row
//! from the renewal law, then apply one θ-step of the diffusion on each age
//! row and add `dt·f`.

mod adjoint;
mod characteristics;
mod diffusion;
mod forward;
mod trajectory;
pub mod tridiag;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

pub use adjoint::{adjoint_step, solve_adjoint_transpose};
pub use characteristics::{characteristics_adjoint, CharacteristicsReport};
pub use diffusion::{assemble_diffusion, diffusion_step, DiffusionOperator, Scheme, SliceStepper};
pub use forward::{forward_step, solve_forward, Stepper};
pub use trajectory::{Trajectory, TrajectoryKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Age-boundary law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Renewal {
    /// `y(t, 0, x) = ∫ β y da` (trapezoid rule).
    Integral,
    /// `y(t, 0, x) = 0`.
    Zero,
}
