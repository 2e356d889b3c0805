//! Discrete `L²_{1/k}` inner products.
//!
//! Every space node carries the weight `w_i = ∫_{cell_i} dx/k`, where the
//! cell is `[x_i - h/2, x_i + h/2] ∩ [0, 1]`. Nodes with divergent cell
//! integrals (the degenerate node in strong regimes) are excluded. The same
//! weights define the effective nodal coefficient `h / w_i` used by the
//! diffusion stencil, which makes that stencil symmetric in this inner product.

use ndarray::{ArrayView2, Axis};

use super::{DispersionCoefficient, Lattice, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub struct CellWeights {
    w: Vec<f64>,
    active: Vec<bool>,
    k_eff: Vec<f64>,
}

impl CellWeights {
    pub fn new(k: &DispersionCoefficient, lattice: &Lattice) -> Result<Self, ModelError> {
        let nx = lattice.nx();
        let h = lattice.h();
        let mut w = Vec::with_capacity(nx);
        for i in 0..nx {
            let x = lattice.x(i);
            let lo = (x - 0.5 * h).max(0.0);
            let hi = (x + 0.5 * h).min(1.0);
            w.push(k.inverse_integral(lo, hi)?);
        }
        let active: Vec<bool> = (0..nx).map(|i| i > 0 && i + 1 < nx && w[i].is_finite() && w[i] > 0.0).collect();
        let k_eff = (0..nx).map(|i| if active[i] { h / w[i] } else { 0.0 }).collect();
        Ok(Self { w, active, k_eff })
    }

    /// Raw cell integrals (possibly infinite).
    pub fn raw(&self) -> &[f64] {
        &self.w
    }

    /// Nodes carrying state: interior and with finite weight.
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    /// Weight used in inner products; zero on excluded nodes.
    pub fn weight(&self, i: usize) -> f64 {
        if self.w[i].is_finite() {
            self.w[i]
        } else {
            0.0
        }
    }

    /// Effective nodal diffusion coefficient `h / w_i` (zero off the active set).
    pub fn k_eff(&self) -> &[f64] {
        &self.k_eff
    }

    /// `Σ_i w_i u_i v_i` over nodes with finite weight.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).enumerate().map(|(i, (a, b))| self.weight(i) * a * b).sum()
    }

    /// Zeroes `u` off the active set.
    pub fn project(&self, u: &mut [f64]) {
        for (ui, &on) in u.iter_mut().zip(&self.active) {
            if !on {
                *ui = 0.0;
            }
        }
    }

    /// State inner product on age × space fields: `Σ_j da Σ_i w_i u v`.
    pub fn state_inner(&self, u: ArrayView2<f64>, v: ArrayView2<f64>, da: f64) -> f64 {
        u.axis_iter(Axis(0))
            .zip(v.axis_iter(Axis(0)))
            .map(|(ur, vr)| {
                ur.iter().zip(vr.iter()).enumerate().map(|(i, (a, b))| self.weight(i) * a * b).sum::<f64>()
            })
            .sum::<f64>()
            * da
    }

    /// State inner product restricted to the age rows in `rows`.
    pub fn state_inner_rows(&self, u: ArrayView2<f64>, v: ArrayView2<f64>, da: f64, rows: std::ops::Range<usize>) -> f64 {
        rows.map(|j| {
            u.row(j).iter().zip(v.row(j).iter()).enumerate().map(|(i, (a, b))| self.weight(i) * a * b).sum::<f64>()
        })
        .sum::<f64>()
            * da
    }
}

/// `‖u‖_{1/k}` of a space grid function.
pub fn weighted_norm(u: &[f64], k: &DispersionCoefficient, lattice: &Lattice) -> Result<f64, ModelError> {
    if u.len() != lattice.nx() {
        return Err(ModelError::Data(format!("expected {} space values, got {}", lattice.nx(), u.len())));
    }
    if let Some(bad) = u.iter().find(|v| !v.is_finite()) {
        return Err(ModelError::Data(format!("non-finite value {bad} in grid function")));
    }
    let w = CellWeights::new(k, lattice)?;
    Ok(w.inner(u, u).sqrt())
}

/// `‖u‖_{L²(0,A; L²_{1/k})}` of an age × space grid function (trapezoid in age).
pub fn weighted_norm_aq(u: ArrayView2<f64>, k: &DispersionCoefficient, lattice: &Lattice) -> Result<f64, ModelError> {
    if u.dim() != (lattice.na() + 1, lattice.nx()) {
        return Err(ModelError::Data(format!(
            "expected ({}, {}) field, got {:?}",
            lattice.na() + 1,
            lattice.nx(),
            u.dim()
        )));
    }
    if let Some(bad) = u.iter().find(|v| !v.is_finite()) {
        return Err(ModelError::Data(format!("non-finite value {bad} in grid function")));
    }
    let w = CellWeights::new(k, lattice)?;
    let trap = lattice.age_trapezoid();
    let total: f64 = u
        .axis_iter(Axis(0))
        .zip(&trap)
        .map(|(row, c)| c * row.iter().enumerate().map(|(i, v)| w.weight(i) * v * v).sum::<f64>())
        .sum();
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn zero_has_zero_norm() {
        let lattice = Lattice::new(33, 16, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        assert_eq!(weighted_norm(&vec![0.0; 33], &k, &lattice).unwrap(), 0.0);
        let z = Array2::zeros((lattice.na() + 1, 33));
        assert_eq!(weighted_norm_aq(z.view(), &k, &lattice).unwrap(), 0.0);
    }

    #[test]
    fn unit_coefficient_unit_function() {
        let lattice = Lattice::new(129, 16, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::constant(1.0).unwrap();
        let mut u = vec![1.0; 129];
        u[0] = 0.0;
        u[128] = 0.0;
        let n = weighted_norm(&u, &k, &lattice).unwrap();
        assert!((n - 1.0).abs() <= lattice.h(), "{n}");
        let field = Array2::from_shape_fn((lattice.na() + 1, 129), |(_, i)| u[i]);
        let n = weighted_norm_aq(field.view(), &k, &lattice).unwrap();
        assert!((n - 2f64.sqrt()).abs() <= 2.0 * lattice.h(), "{n}");
    }

    #[test]
    fn sqrt_coefficient_closed_form() {
        // ∫₀¹ x² x^{-1/2} dx = 2/5
        let lattice = Lattice::new(257, 16, 1.0, 1.0).unwrap();
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        let u: Vec<f64> = lattice.x_nodes();
        let n = weighted_norm(&u, &k, &lattice).unwrap();
        assert!((n - (0.4f64).sqrt()).abs() < 1e-4, "{n}");
        // (∫₀¹ a² da)(2/5) = 2/15
        let lattice = Lattice::new(257, 256, 1.0, 1.0).unwrap();
        let field = Array2::from_shape_fn((lattice.na() + 1, 257), |(j, i)| lattice.a(j) * lattice.x(i));
        let n = weighted_norm_aq(field.view(), &k, &lattice).unwrap();
        assert!((n - (2.0f64 / 15.0).sqrt()).abs() < 1e-4, "{n}");
    }

    #[test]
    fn non_finite_rejected() {
        let lattice = Lattice::new(9, 8, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::constant(1.0).unwrap();
        let mut u = vec![0.0; 9];
        u[3] = f64::NAN;
        assert!(matches!(weighted_norm(&u, &k, &lattice), Err(ModelError::Data(_))));
    }

    #[test]
    fn strong_degenerate_node_excluded() {
        let lattice = Lattice::new(33, 16, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::interior(1.5, 0.5).unwrap();
        let w = CellWeights::new(&k, &lattice).unwrap();
        assert!(!w.is_active(16));
        assert_eq!(w.k_eff()[16], 0.0);
        let k = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        let w = CellWeights::new(&k, &lattice).unwrap();
        assert!(w.is_active(16));
        assert!(w.k_eff()[16] > 0.0 && w.k_eff()[16] < k.eval(0.5 + lattice.h()).unwrap());
    }
}
