use std::fmt;
use std::sync::Arc;

use super::{Lattice, ModelError};

pub type MortalityFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type FertilityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Death rate `μ(t, a, x)`, fertility `β(a, x)` and fertility onset `ā`.
#[derive(Clone)]
pub struct Rates {
    mu: MortalityFn,
    beta: FertilityFn,
    abar: f64,
}

impl fmt::Debug for Rates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rates").field("abar", &self.abar).finish_non_exhaustive()
    }
}

impl Rates {
    pub fn new(mu: MortalityFn, beta: FertilityFn, abar: f64) -> Self {
        Self { mu, beta, abar }
    }

    /// Constant mortality, no births.
    pub fn mortality_only(mu0: f64, abar: f64) -> Self {
        Self::new(Arc::new(move |_, _, _| mu0), Arc::new(|_, _| 0.0), abar)
    }

    pub fn mu(&self, t: f64, a: f64, x: f64) -> f64 {
        (self.mu)(t, a, x)
    }

    pub fn beta(&self, a: f64, x: f64) -> f64 {
        (self.beta)(a, x)
    }

    pub fn abar(&self) -> f64 {
        self.abar
    }

    /// Same fertility, `μ` multiplied by `factor`.
    pub fn with_scaled_mortality(&self, factor: f64) -> Self {
        let mu = self.mu.clone();
        Self { mu: Arc::new(move |t, a, x| factor * mu(t, a, x)), beta: self.beta.clone(), abar: self.abar }
    }

    /// Checks sign and onset conditions on every lattice node.
    pub fn validate(&self, lattice: &Lattice) -> Result<(), ModelError> {
        for j in 0..=lattice.na() {
            let a = lattice.a(j);
            for i in 0..lattice.nx() {
                let x = lattice.x(i);
                let b = self.beta(a, x);
                if !b.is_finite() || b < 0.0 {
                    return Err(ModelError::Rates(format!("beta({a}, {x}) = {b} must be finite and nonnegative")));
                }
                if a <= self.abar + 1e-12 && b != 0.0 {
                    return Err(ModelError::Rates(format!(
                        "beta must vanish for a <= abar = {} (beta({a}, {x}) = {b})",
                        self.abar
                    )));
                }
                for n in 0..=lattice.nt() {
                    let t = lattice.t(n);
                    let m = self.mu(t, a, x);
                    if !m.is_finite() || m < 0.0 {
                        return Err(ModelError::Rates(format!("mu({t}, {a}, {x}) = {m} must be finite and nonnegative")));
                    }
                }
                // CN samples μ at half steps.
                for n in 0..lattice.nt() {
                    let t = lattice.t(n) + 0.5 * lattice.dt();
                    let m = self.mu(t, a, x);
                    if !m.is_finite() || m < 0.0 {
                        return Err(ModelError::Rates(format!("mu({t}, {a}, {x}) = {m} must be finite and nonnegative")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onset_violation_detected() {
        let lattice = Lattice::new(9, 8, 1.0, 2.0).unwrap();
        let rates = Rates::new(Arc::new(|_, _, _| 0.1), Arc::new(|_, _| 1.0), 0.5);
        assert!(matches!(rates.validate(&lattice), Err(ModelError::Rates(_))));
        let rates = Rates::new(Arc::new(|_, _, _| 0.1), Arc::new(|a, _| if a > 0.5 { 1.0 } else { 0.0 }), 0.5);
        assert!(rates.validate(&lattice).is_ok());
    }

    #[test]
    fn negative_mortality_detected() {
        let lattice = Lattice::new(9, 8, 1.0, 2.0).unwrap();
        let rates = Rates::mortality_only(-0.1, 0.5);
        assert!(rates.validate(&lattice).is_err());
    }
}
