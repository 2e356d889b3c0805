use serde::{Deserialize, Serialize};

use super::ModelError;

/// Uniform space–age–time grid with one shared step for age and time.
///
/// Space has `nx` nodes on `[0, 1]` (both endpoints included, `h = 1/(nx-1)`),
/// age has `na + 1` nodes on `[0, A]` and time has `nt + 1` levels on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    nx: usize,
    na: usize,
    nt: usize,
    t_final: f64,
    a_max: f64,
    h: f64,
    step: f64,
}

const ALIGN_TOL: f64 = 1e-12;

impl Lattice {
    /// Builds the lattice from the number of space nodes and time steps; the
    /// age step count follows from `Δa = Δt`.
    pub fn new(nx: usize, nt: usize, t_final: f64, a_max: f64) -> Result<Self, ModelError> {
        if !(t_final > 0.0 && a_max > 0.0) || !t_final.is_finite() || !a_max.is_finite() {
            return Err(ModelError::Lattice(format!("horizons must be positive (T = {t_final}, A = {a_max})")));
        }
        if nt == 0 {
            return Err(ModelError::Lattice("need at least one time step".into()));
        }
        let ratio = a_max * nt as f64 / t_final;
        let na = ratio.round();
        if na < 1.0 || (ratio - na).abs() > ALIGN_TOL * ratio.max(1.0) {
            return Err(ModelError::Lattice(format!(
                "A·nt/T = {ratio} is not an integer, so the age step cannot equal the time step"
            )));
        }
        Self::with_counts(nx, na as usize, nt, t_final, a_max)
    }

    /// Builds the lattice from explicit counts, rejecting `A/na ≠ T/nt`.
    pub fn with_counts(nx: usize, na: usize, nt: usize, t_final: f64, a_max: f64) -> Result<Self, ModelError> {
        if nx < 3 {
            return Err(ModelError::Lattice(format!("need at least 3 space nodes, got {nx}")));
        }
        if na == 0 || nt == 0 {
            return Err(ModelError::Lattice("need at least one age and one time step".into()));
        }
        // A/na = T/nt  ⇔  A·nt = T·na, compared before dividing.
        let lhs = a_max * nt as f64;
        let rhs = t_final * na as f64;
        if (lhs - rhs).abs() > ALIGN_TOL * lhs.abs().max(rhs.abs()) {
            return Err(ModelError::Lattice(format!(
                "misaligned lattice: A/na = {} but T/nt = {}",
                a_max / na as f64,
                t_final / nt as f64
            )));
        }
        Ok(Self {
            nx,
            na,
            nt,
            t_final,
            a_max,
            h: 1.0 / (nx - 1) as f64,
            step: t_final / nt as f64,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of age steps; there are `na + 1` age nodes.
    pub fn na(&self) -> usize {
        self.na
    }

    /// Number of time steps; there are `nt + 1` time levels.
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The shared age/time step.
    pub fn dt(&self) -> f64 {
        self.step
    }

    pub fn da(&self) -> f64 {
        self.step
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn a(&self, j: usize) -> f64 {
        if j == self.na {
            self.a_max
        } else {
            j as f64 * self.step
        }
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.nt {
            self.t_final
        } else {
            n as f64 * self.step
        }
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn a_nodes(&self) -> Vec<f64> {
        (0..=self.na).map(|j| self.a(j)).collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        (0..=self.nt).map(|n| self.t(n)).collect()
    }

    /// Index of the space node at `x`, if `x` is (to rounding) a node.
    pub fn x_index(&self, x: f64) -> Option<usize> {
        exact_index(x / self.h, self.nx - 1)
    }

    /// Index of the age node at `a`, if `a` is a node.
    pub fn a_index(&self, a: f64) -> Option<usize> {
        exact_index(a / self.step, self.na)
    }

    /// Index of the time level at `t`, if `t` is a level.
    pub fn t_index(&self, t: f64) -> Option<usize> {
        exact_index(t / self.step, self.nt)
    }

    /// Largest age node index with `a_j ≤ a`.
    pub fn a_index_floor(&self, a: f64) -> usize {
        let r = a / self.step;
        let j = if (r - r.round()).abs() < 1e-9 { r.round() } else { r.floor() };
        (j.max(0.0) as usize).min(self.na)
    }

    /// Trapezoid weights over the age nodes.
    pub fn age_trapezoid(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.na + 1];
        w[0] *= 0.5;
        w[self.na] *= 0.5;
        w
    }

    /// A short human-readable tag such as `65x128x64`.
    pub fn tag(&self) -> String {
        format!("{}x{}x{}", self.nx, self.na + 1, self.nt)
    }
}

fn exact_index(r: f64, max: usize) -> Option<usize> {
    let k = r.round();
    if (r - k).abs() < 1e-9 && k >= 0.0 && k <= max as f64 {
        Some(k as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn age_count_follows_from_alignment() {
        let l = Lattice::new(17, 16, 1.0, 2.0).unwrap();
        assert_eq!(l.na(), 32);
        assert_eq!(l.dt(), l.da());
        assert_eq!(l.h(), 1.0 / 16.0);
        assert_eq!(l.x(16), 1.0);
        assert_eq!(l.a(32), 2.0);
    }

    #[test]
    fn misaligned_counts_rejected() {
        assert!(Lattice::with_counts(17, 8, 16, 1.0, 2.0).is_err());
        assert!(Lattice::with_counts(17, 32, 16, 1.0, 2.0).is_ok());
        assert!(Lattice::new(17, 3, 1.0, 0.5).is_err());
    }

    #[test]
    fn node_lookup() {
        let l = Lattice::new(65, 64, 1.0, 2.0).unwrap();
        assert_eq!(l.x_index(0.5), Some(32));
        assert_eq!(l.x_index(0.3), None);
        assert_eq!(l.a_index(0.5), Some(32));
        assert_eq!(l.a_index_floor(1.51), 96);
        assert_eq!(l.a_index_floor(1.5), 96);
    }
}
