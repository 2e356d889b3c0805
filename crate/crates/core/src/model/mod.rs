//! Problem data: dispersion coefficient, rates, control set, grids and
//! weighted norms.

mod coefficient;
mod lattice;
mod norms;
mod rates;
mod region;
mod validation;

use ndarray::Array2;
use thiserror::Error;

pub use coefficient::{DispersionCoefficient, Profile, Regime, ScalarFn};
pub use lattice::Lattice;
pub use norms::{weighted_norm, weighted_norm_aq, CellWeights};
pub use rates::{FertilityFn, MortalityFn, Rates};
pub use region::{ControlRegion, Interval};
pub use validation::{validate_hypotheses, HypothesisCheck, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("x = {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("invalid coefficient: {0}")]
    Coefficient(String),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid rates: {0}")]
    Rates(String),
    #[error("invalid control region: {0}")]
    Region(String),
    #[error("invalid problem: {0}")]
    Setup(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

/// Age × space grid function, rows indexed by age node.
pub type Field = Array2<f64>;

/// A fully validated control problem on a lattice.
#[derive(Debug, Clone)]
pub struct Problem {
    k: DispersionCoefficient,
    rates: Rates,
    omega: ControlRegion,
    lattice: Lattice,
    delta_requested: f64,
    delta: f64,
    weights: CellWeights,
    beta_grid: Field,
    omega_mask: Vec<bool>,
}

impl Problem {
    pub fn new(
        k: DispersionCoefficient,
        rates: Rates,
        omega: ControlRegion,
        lattice: Lattice,
        delta: f64,
    ) -> Result<Self, ModelError> {
        let t = lattice.t_final();
        let a_max = lattice.a_max();
        let abar = rates.abar();
        if !(t < a_max) {
            return Err(ModelError::Setup(format!("need T < A (T = {t}, A = {a_max})")));
        }
        if !(abar > 0.0 && abar <= t) {
            return Err(ModelError::Setup(format!("fertility onset abar = {abar} must lie in (0, T]")));
        }
        if lattice.a_index(abar).is_none() {
            return Err(ModelError::Setup(format!("abar = {abar} is not an age node (da = {})", lattice.da())));
        }
        if !(delta > t && delta < a_max) {
            return Err(ModelError::Setup(format!("delta must exceed T and stay below A (delta = {delta}, T = {t}, A = {a_max})")));
        }
        let delta_snapped = lattice.a(lattice.a_index_floor(delta));
        if delta_snapped <= t {
            return Err(ModelError::Setup(format!(
                "delta = {delta} snaps down to {delta_snapped} <= T; refine the lattice"
            )));
        }
        if let Some(p) = k.degeneracy_point() {
            if lattice.x_index(p).is_none() {
                return Err(ModelError::Setup(format!("degeneracy point {p} is not a space node (h = {})", lattice.h())));
            }
        }
        omega.validate(&k)?;
        rates.validate(&lattice)?;
        let weights = CellWeights::new(&k, &lattice)?;
        let beta_grid = Array2::from_shape_fn((lattice.na() + 1, lattice.nx()), |(j, i)| rates.beta(lattice.a(j), lattice.x(i)));
        let omega_mask = omega.mask(&lattice);
        Ok(Self {
            k,
            rates,
            omega,
            lattice,
            delta_requested: delta,
            delta: delta_snapped,
            weights,
            beta_grid,
            omega_mask,
        })
    }

    /// Same data on a different lattice.
    pub fn on_lattice(&self, lattice: Lattice) -> Result<Self, ModelError> {
        Self::new(self.k.clone(), self.rates.clone(), self.omega.clone(), lattice, self.delta_requested)
    }

    /// Same data with a different control set.
    pub fn with_omega(&self, omega: ControlRegion) -> Result<Self, ModelError> {
        Self::new(self.k.clone(), self.rates.clone(), omega, self.lattice.clone(), self.delta_requested)
    }

    /// Same data with different rates.
    pub fn with_rates(&self, rates: Rates) -> Result<Self, ModelError> {
        Self::new(self.k.clone(), rates, self.omega.clone(), self.lattice.clone(), self.delta_requested)
    }

    pub fn k(&self) -> &DispersionCoefficient {
        &self.k
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn omega(&self) -> &ControlRegion {
        &self.omega
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn weights(&self) -> &CellWeights {
        &self.weights
    }

    pub fn t_final(&self) -> f64 {
        self.lattice.t_final()
    }

    pub fn a_max(&self) -> f64 {
        self.lattice.a_max()
    }

    pub fn abar(&self) -> f64 {
        self.rates.abar()
    }

    /// `T̃ = T - ā`.
    pub fn t_tilde(&self) -> f64 {
        self.t_final() - self.abar()
    }

    /// Time level of `T̃`.
    pub fn t_tilde_step(&self) -> usize {
        self.lattice.nt() - self.lattice.a_index(self.abar()).expect("abar is an age node")
    }

    /// Target margin after snapping down to an age node.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta_requested(&self) -> f64 {
        self.delta_requested
    }

    /// Age rows of the target set: `δ ≤ a_j < A`.
    pub fn target_rows(&self) -> std::ops::Range<usize> {
        self.lattice.a_index_floor(self.delta)..self.lattice.na()
    }

    pub fn beta_grid(&self) -> &Field {
        &self.beta_grid
    }

    pub fn omega_mask(&self) -> &[bool] {
        &self.omega_mask
    }

    /// Zeroes a field off the active space nodes.
    pub fn project_field(&self, u: &mut Field) {
        for mut row in u.rows_mut() {
            for (i, v) in row.iter_mut().enumerate() {
                if !self.weights.is_active(i) {
                    *v = 0.0;
                }
            }
        }
    }

    pub fn zero_field(&self) -> Field {
        Array2::zeros((self.lattice.na() + 1, self.lattice.nx()))
    }

    /// State inner product `Σ_{j<na} da Σ_i w_i u v` (left-endpoint rule in
    /// age, so the `a = A` row carries no weight).
    pub fn inner(&self, u: &Field, v: &Field) -> f64 {
        self.weights.state_inner_rows(u.view(), v.view(), self.lattice.da(), 0..self.lattice.na())
    }

    pub fn norm(&self, u: &Field) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// State inner product over the target rows only.
    pub fn target_inner(&self, u: &Field, v: &Field) -> f64 {
        self.weights.state_inner_rows(u.view(), v.view(), self.lattice.da(), self.target_rows())
    }

    /// State inner product restricted to `χ_ω`.
    pub fn omega_inner(&self, u: &Field, v: &Field) -> f64 {
        let mut s = 0.0;
        for (ur, vr) in u.rows().into_iter().zip(v.rows()).take(self.lattice.na()) {
            for (i, (a, b)) in ur.iter().zip(vr.iter()).enumerate() {
                if self.omega_mask[i] {
                    s += self.weights.weight(i) * a * b;
                }
            }
        }
        s * self.lattice.da()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(delta: f64, abar: f64) -> Result<Problem, ModelError> {
        Problem::new(
            DispersionCoefficient::boundary0(0.5)?,
            Rates::mortality_only(0.1, abar),
            ControlRegion::single(0.3, 0.8),
            Lattice::new(17, 16, 1.0, 2.0)?,
            delta,
        )
    }

    #[test]
    fn delta_snaps_down() {
        let p = base(1.53, 0.5).unwrap();
        assert_eq!(p.delta(), 1.5);
        assert_eq!(p.target_rows(), 24..32);
        assert_eq!(p.t_tilde_step(), 8);
    }

    #[test]
    fn setup_constraints() {
        assert!(base(1.0, 0.5).is_err());
        assert!(base(2.0, 0.5).is_err());
        assert!(base(1.5, 1.5).is_err());
        assert!(base(1.5, 0.51).is_err());
        // 1.03 snaps to 1.0 = T
        assert!(base(1.03, 0.5).is_err());
    }

    #[test]
    fn interior_point_must_be_node() {
        let r = Problem::new(
            DispersionCoefficient::interior(0.5, 0.3).unwrap(),
            Rates::mortality_only(0.1, 0.5),
            ControlRegion::single(0.2, 0.8),
            Lattice::new(17, 16, 1.0, 2.0).unwrap(),
            1.5,
        );
        assert!(r.is_err());
    }
}
