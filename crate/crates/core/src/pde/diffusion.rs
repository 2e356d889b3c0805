use serde::{Deserialize, Serialize};

use super::tridiag::Tridiagonal;
use super::PdeError;
use crate::model::{CellWeights, DispersionCoefficient, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    /// Time at which `μ` is sampled for the step starting at `t`.
    pub fn mu_time(self, t: f64, dt: f64) -> f64 {
        match self {
            Scheme::ImplicitEuler => t + dt,
            Scheme::CrankNicolson => t + 0.5 * dt,
        }
    }
}

/// Tridiagonal `u ↦ k̃_i (u_{i+1} - 2u_i + u_{i-1})/h² - μ_i u_i` on the active
/// nodes, with `k̃_i = h / w_i`. Dirichlet endpoints have zero rows and
/// couplings into inactive nodes are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOperator {
    matrix: Tridiagonal,
}

impl DiffusionOperator {
    pub fn from_weights(weights: &CellWeights, mu: &[f64], h: f64) -> Self {
        let n = mu.len();
        let mut m = Tridiagonal::zeros(n);
        fill_operator(&mut m, weights, mu, h);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Tridiagonal {
        &self.matrix
    }

    /// Row `i` as `[lower, diag, upper]`.
    pub fn row(&self, i: usize) -> [f64; 3] {
        [self.matrix.lower[i], self.matrix.diag[i], self.matrix.upper[i]]
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.apply(u)
    }

    /// Largest `|w_i Op_{i,i+1} - w_{i+1} Op_{i+1,i}|`, relative to the
    /// largest weighted entry.
    pub fn weighted_symmetry_defect(&self, weights: &CellWeights) -> f64 {
        let n = self.matrix.len();
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for i in 0..n - 1 {
            let a = weights.weight(i) * self.matrix.upper[i];
            let b = weights.weight(i + 1) * self.matrix.lower[i + 1];
            scale = scale.max(a.abs()).max(b.abs());
            defect = defect.max((a - b).abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

fn fill_operator(m: &mut Tridiagonal, weights: &CellWeights, mu: &[f64], h: f64) {
    let n = mu.len();
    let k = weights.k_eff();
    let h2 = h * h;
    for i in 0..n {
        m.lower[i] = 0.0;
        m.upper[i] = 0.0;
        if weights.is_active(i) {
            let off = k[i] / h2;
            if weights.is_active(i - 1) {
                m.lower[i] = off;
            }
            if weights.is_active(i + 1) {
                m.upper[i] = off;
            }
            m.diag[i] = -2.0 * off - mu[i];
        } else if i > 0 && i + 1 < n {
            m.diag[i] = -mu[i];
        } else {
            m.diag[i] = 0.0;
        }
    }
}

/// `Op` from a coefficient and a `μ` slice sampled on the space nodes.
pub fn assemble_diffusion(k: &DispersionCoefficient, mu_slice: &[f64], lattice: &Lattice) -> Result<DiffusionOperator, PdeError> {
    if mu_slice.len() != lattice.nx() {
        return Err(PdeError::Data(format!("mu slice has {} values, lattice has {} nodes", mu_slice.len(), lattice.nx())));
    }
    let weights = CellWeights::new(k, lattice)?;
    Ok(DiffusionOperator::from_weights(&weights, mu_slice, lattice.h()))
}

/// One θ-step `(I - θ dt Op) u⁺ = (I + (1-θ) dt Op) u`.
pub fn diffusion_step(u: &[f64], dt: f64, op: &DiffusionOperator, scheme: Scheme) -> Result<Vec<f64>, PdeError> {
    if !(dt > 0.0) {
        return Err(PdeError::Data(format!("dt = {dt} must be positive")));
    }
    let mut stepper = SliceStepper::new(u.len());
    stepper.load_operator(&op.matrix, dt, scheme.theta());
    let mut v = u.to_vec();
    stepper.forward(&mut v)?;
    Ok(v)
}

/// Reusable buffers for the per-slice propagator `P = B⁻¹C`.
#[derive(Debug, Clone)]
pub struct SliceStepper {
    op: Tridiagonal,
    b: Tridiagonal,
    c: Tridiagonal,
    tmp: Vec<f64>,
    scratch: Vec<f64>,
}

impl SliceStepper {
    pub fn new(n: usize) -> Self {
        Self {
            op: Tridiagonal::zeros(n),
            b: Tridiagonal::zeros(n),
            c: Tridiagonal::zeros(n),
            tmp: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Builds `B` and `C` from the operator with these weights and `μ`.
    pub fn load(&mut self, weights: &CellWeights, mu: &[f64], h: f64, dt: f64, theta: f64) {
        let mut op = std::mem::replace(&mut self.op, Tridiagonal::zeros(0));
        fill_operator(&mut op, weights, mu, h);
        self.load_operator(&op, dt, theta);
        self.op = op;
    }

    fn load_operator(&mut self, op: &Tridiagonal, dt: f64, theta: f64) {
        let a = theta * dt;
        let e = (1.0 - theta) * dt;
        for i in 0..op.len() {
            self.b.lower[i] = -a * op.lower[i];
            self.b.upper[i] = -a * op.upper[i];
            self.b.diag[i] = 1.0 - a * op.diag[i];
            self.c.lower[i] = e * op.lower[i];
            self.c.upper[i] = e * op.upper[i];
            self.c.diag[i] = 1.0 + e * op.diag[i];
        }
    }

    /// `u ← B⁻¹(C u)`.
    pub fn forward(&mut self, u: &mut [f64]) -> Result<(), PdeError> {
        self.c.apply_into(u, &mut self.tmp);
        u.copy_from_slice(&self.tmp);
        if !self.b.solve_in_place(u, &mut self.scratch) {
            return Err(PdeError::Numerical("singular diffusion system".into()));
        }
        Ok(())
    }

    /// `v ← C(B⁻¹ v)`, the weighted adjoint of [`forward`](Self::forward).
    pub fn adjoint(&mut self, v: &mut [f64]) -> Result<(), PdeError> {
        if !self.b.solve_in_place(v, &mut self.scratch) {
            return Err(PdeError::Numerical("singular diffusion system".into()));
        }
        self.c.apply_into(v, &mut self.tmp);
        v.copy_from_slice(&self.tmp);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_stencil() {
        let lattice = Lattice::new(5, 4, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::constant(1.0).unwrap();
        let op = assemble_diffusion(&k, &[0.0; 5], &lattice).unwrap();
        let [l, d, u] = op.row(2);
        assert!((l - 16.0).abs() < 1e-12 && (d + 32.0).abs() < 1e-12 && (u - 16.0).abs() < 1e-12);
        assert_eq!(op.row(0), [0.0, 0.0, 0.0]);
        // h = 0.5
        let lattice = Lattice::new(3, 4, 1.0, 2.0).unwrap();
        let op = assemble_diffusion(&k, &[0.0; 3], &lattice).unwrap();
        // both neighbours are Dirichlet nodes, so only the diagonal survives
        assert!((op.row(1)[1] + 8.0).abs() < 1e-12);
    }

    #[test]
    fn strong_degenerate_row_is_reaction() {
        let lattice = Lattice::new(9, 4, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::interior(1.5, 0.5).unwrap();
        let op = assemble_diffusion(&k, &[0.3; 9], &lattice).unwrap();
        assert_eq!(op.row(4), [0.0, -0.3, 0.0]);
        assert_eq!(op.row(3)[2], 0.0);
        assert_eq!(op.row(5)[0], 0.0);
    }

    #[test]
    fn weighted_symmetry_random_power_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lattice = Lattice::new(33, 4, 1.0, 2.0).unwrap();
        for _ in 0..10 {
            let alpha = rng.gen_range(0.1..1.9);
            for k in [
                DispersionCoefficient::boundary0(alpha).unwrap(),
                DispersionCoefficient::boundary1(alpha).unwrap(),
                DispersionCoefficient::interior(alpha, 0.5).unwrap(),
            ] {
                let mu: Vec<f64> = (0..33).map(|_| rng.gen_range(0.0..2.0)).collect();
                let w = CellWeights::new(&k, &lattice).unwrap();
                let op = DiffusionOperator::from_weights(&w, &mu, lattice.h());
                assert!(op.weighted_symmetry_defect(&w) < 1e-12);
            }
        }
    }

    #[test]
    fn zero_is_fixed() {
        let lattice = Lattice::new(9, 4, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        let op = assemble_diffusion(&k, &[0.1; 9], &lattice).unwrap();
        assert_eq!(diffusion_step(&[0.0; 9], 0.1, &op, Scheme::CrankNicolson).unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn crank_nicolson_eigenmode() {
        let nx = 33;
        let lattice = Lattice::new(nx, 4, 1.0, 2.0).unwrap();
        let h = lattice.h();
        let k = DispersionCoefficient::constant(1.0).unwrap();
        let op = assemble_diffusion(&k, &vec![0.0; nx], &lattice).unwrap();
        let u: Vec<f64> = lattice.x_nodes().iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
        let dt = 0.01;
        let lam = 4.0 * (std::f64::consts::PI * h / 2.0).sin().powi(2) / (h * h);
        let factor = (1.0 - lam * dt / 2.0) / (1.0 + lam * dt / 2.0);
        let v = diffusion_step(&u, dt, &op, Scheme::CrankNicolson).unwrap();
        for i in 1..nx - 1 {
            assert!((v[i] - factor * u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_reaction_implicit_euler() {
        let mut m = Tridiagonal::zeros(9);
        for i in 1..8 {
            m.diag[i] = -0.7;
        }
        let op = DiffusionOperator { matrix: m };
        let u = vec![0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        let v = diffusion_step(&u, 0.2, &op, Scheme::ImplicitEuler).unwrap();
        for i in 0..9 {
            assert!((v[i] - u[i] / (1.0 + 0.7 * 0.2)).abs() < 1e-15);
        }
    }

    #[test]
    fn stepper_adjoint_is_weighted_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lattice = Lattice::new(17, 4, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        let w = CellWeights::new(&k, &lattice).unwrap();
        let mu: Vec<f64> = (0..17).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut st = SliceStepper::new(17);
        st.load(&w, &mu, lattice.h(), 0.05, 0.5);
        let mut u: Vec<f64> = (0..17).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut v: Vec<f64> = (0..17).map(|_| rng.gen_range(-1.0..1.0)).collect();
        w.project(&mut u);
        w.project(&mut v);
        let (mut pu, mut pv) = (u.clone(), v.clone());
        st.forward(&mut pu).unwrap();
        st.adjoint(&mut pv).unwrap();
        let lhs = w.inner(&pu, &v);
        let rhs = w.inner(&u, &pv);
        assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0));
    }
}
