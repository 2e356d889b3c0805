/// Tridiagonal matrix stored by diagonals; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = A u`.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.lower[i] * u[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * u[i + 1];
            }
            out[i] = s;
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    /// Solves `A x = rhs` in place by the Thomas algorithm; `scratch` holds
    /// the modified upper diagonal. Returns `false` on a zero pivot.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut [f64]) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return false;
        }
        scratch[0] = self.upper[0] / piv;
        rhs[0] /= piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * scratch[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return false;
            }
            scratch[i] = if i + 1 < n { self.upper[i] / piv } else { 0.0 };
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i] * rhs[i + 1];
        }
        true
    }

    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let mut x = rhs.to_vec();
        let mut scratch = vec![0.0; rhs.len()];
        self.solve_in_place(&mut x, &mut scratch).then_some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_matrix() {
        let n = 6;
        let mut a = Tridiagonal::zeros(n);
        for i in 0..n {
            a.diag[i] = 2.0;
            a.lower[i] = -1.0;
            a.upper[i] = -1.0;
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.apply(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let a = Tridiagonal::zeros(3);
        assert!(a.solve(&[1.0, 2.0, 3.0]).is_none());
    }
}
