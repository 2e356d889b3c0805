//! Discrete checks of the weighted inequalities and identities satisfied by
//! the model: both sides are evaluated on lattice solutions and the largest
//! ratio is reported as an effective constant.

mod caccioppoli;
mod carleman;
mod duality;
mod energy;
mod hardy;
mod observability;
mod random;

use serde::Serialize;
use thiserror::Error;

use crate::hum::HumError;
use crate::model::ModelError;
use crate::pde::PdeError;
use crate::weights::WeightError;

pub use caccioppoli::check_caccioppoli;
pub use carleman::{check_carleman_global, check_carleman_local, manufactured, scaled_s_values, CarlemanSource, CarlemanVariant, Manufactured};
pub use duality::check_duality;
pub use energy::check_energy_decay;
pub use hardy::{check_hardy, hardy_closed_form, HARDY_EXPONENTS};
pub use observability::{check_observability, smooth_terminal_datum};
pub use random::random_field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Hum(#[from] HumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CarlemanGlobalBoundary0,
    CarlemanGlobalBoundary1,
    CarlemanGlobalInterior,
    CarlemanNonDeg,
    CarlemanNonDegWeak,
    CarlemanLocal,
    Observability,
    Caccioppoli,
    HardyPoincare,
    EnergyDecay,
    Duality,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::CarlemanGlobalBoundary0 => "carleman_global_boundary0",
            Family::CarlemanGlobalBoundary1 => "carleman_global_boundary1",
            Family::CarlemanGlobalInterior => "carleman_global_interior",
            Family::CarlemanNonDeg => "carleman_nondeg",
            Family::CarlemanNonDegWeak => "carleman_nondeg_weak",
            Family::CarlemanLocal => "carleman_local",
            Family::Observability => "observability",
            Family::Caccioppoli => "caccioppoli",
            Family::HardyPoincare => "hardy_poincare",
            Family::EnergyDecay => "energy_decay",
            Family::Duality => "duality",
        }
    }
}

/// Both sides of one inequality family over a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub family: Family,
    /// What `s_values` holds: `s`, an exponent, or a trial index.
    pub parameter: &'static str,
    pub s_values: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub effective_constant: f64,
    pub grid_tag: String,
    pub pass: bool,
    pub detail: String,
}

impl InequalityReport {
    /// Ratios (0 when both sides vanish) and their maximum.
    pub fn from_sides(family: Family, parameter: &'static str, s_values: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, grid_tag: String) -> Self {
        let ratios: Vec<f64> = lhs
            .iter()
            .zip(&rhs)
            .map(|(&l, &r)| if l == 0.0 && r == 0.0 { 0.0 } else { l / r })
            .collect();
        let effective_constant = ratios.iter().copied().fold(0.0, f64::max);
        let pass = ratios.iter().all(|r| r.is_finite()) && lhs.iter().chain(&rhs).all(|v| *v >= 0.0);
        Self { family, parameter, s_values, lhs, rhs, ratios, effective_constant, grid_tag, pass, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Aligned-column text table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{} [{}] effective constant {:.6e} {}\n",
            self.family.name(),
            self.grid_tag,
            self.effective_constant,
            if self.pass { "PASS" } else { "FAIL" }
        );
        out.push_str(&format!("{:>14} {:>16} {:>16} {:>16}\n", self.parameter, "lhs", "rhs", "ratio"));
        for k in 0..self.s_values.len() {
            out.push_str(&format!(
                "{:>14.6e} {:>16.8e} {:>16.8e} {:>16.8e}\n",
                self.s_values[k], self.lhs[k], self.rhs[k], self.ratios[k]
            ));
        }
        if !self.detail.is_empty() {
            out.push_str(&self.detail);
            out.push('\n');
        }
        out
    }

    /// CSV with header `param,lhs,rhs,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},lhs,rhs,ratio\n", self.parameter);
        for k in 0..self.s_values.len() {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", self.s_values[k], self.lhs[k], self.rhs[k], self.ratios[k]));
        }
        out
    }
}

/// `max(c₁/c₂, c₂/c₁)` for two effective constants; 1 when both vanish.
pub fn refinement_drift(coarse: &InequalityReport, fine: &InequalityReport) -> f64 {
    let (a, b) = (coarse.effective_constant, fine.effective_constant);
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        (a / b).max(b / a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        let r = InequalityReport::from_sides(Family::Duality, "trial", vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 2.0], "g".into());
        assert_eq!(r.ratios, vec![0.0, 0.5]);
        assert_eq!(r.effective_constant, 0.5);
        assert!(r.pass);
        assert!(r.to_table().contains("duality"));
        assert_eq!(r.to_csv().lines().count(), 3);
    }
}
