use serde::{Deserialize, Serialize};

use super::{DispersionCoefficient, Lattice, ModelError, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn compactly_inside_unit(&self) -> bool {
        self.lo > 0.0 && self.hi < 1.0 && self.lo < self.hi
    }
}

/// The control set `ω`: one interval, or two intervals on either side of an
/// interior degeneracy point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRegion {
    Single(Interval),
    Split(Interval, Interval),
}

impl ControlRegion {
    pub fn single(lo: f64, hi: f64) -> Self {
        ControlRegion::Single(Interval::new(lo, hi))
    }

    pub fn split(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Self {
        ControlRegion::Split(Interval::new(lo1, hi1), Interval::new(lo2, hi2))
    }

    pub fn intervals(&self) -> Vec<Interval> {
        match self {
            ControlRegion::Single(i) => vec![*i],
            ControlRegion::Split(a, b) => vec![*a, *b],
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals().iter().any(|i| i.contains(x))
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        self.intervals().iter().any(|i| i.contains_closed(x))
    }

    /// Checks `ω ⊂⊂ (0,1)` and the placement rules relative to an interior
    /// degeneracy point.
    pub fn validate(&self, k: &DispersionCoefficient) -> Result<(), ModelError> {
        self.validate_compact()?;
        if matches!(k.regime(), Regime::InteriorWeak | Regime::InteriorStrong) {
            let x0 = k.x0().expect("interior regime has x0");
            let ok = match self {
                ControlRegion::Single(i) => i.contains(x0),
                ControlRegion::Split(a, b) => a.hi < x0 && x0 < b.lo,
            };
            if !ok {
                return Err(ModelError::Region(format!(
                    "for interior degeneracy the control set must contain x0 = {x0} or straddle it with two intervals"
                )));
            }
        }
        Ok(())
    }

    /// Checks only `ω ⊂⊂ (0,1)` and the ordering of split intervals.
    pub fn validate_compact(&self) -> Result<(), ModelError> {
        for i in self.intervals() {
            if !i.compactly_inside_unit() {
                return Err(ModelError::Region(format!(
                    "control interval ({}, {}) must have closure inside (0,1)",
                    i.lo, i.hi
                )));
            }
        }
        if let ControlRegion::Split(a, b) = self {
            if a.hi >= b.lo {
                return Err(ModelError::Region("split control intervals must be disjoint and ordered".into()));
            }
        }
        Ok(())
    }

    /// Indicator of `ω` on the space nodes.
    pub fn mask(&self, lattice: &Lattice) -> Vec<bool> {
        (0..lattice.nx()).map(|i| self.contains(lattice.x(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_placement() {
        let k = DispersionCoefficient::interior(0.5, 0.5).unwrap();
        assert!(ControlRegion::single(0.3, 0.8).validate(&k).is_ok());
        assert!(ControlRegion::single(0.6, 0.8).validate(&k).is_err());
        assert!(ControlRegion::split(0.2, 0.4, 0.6, 0.8).validate(&k).is_ok());
        assert!(ControlRegion::split(0.2, 0.6, 0.7, 0.8).validate(&k).is_err());
    }

    #[test]
    fn closure_inside_unit_interval() {
        let k = DispersionCoefficient::boundary0(0.5).unwrap();
        assert!(ControlRegion::single(0.0, 0.5).validate(&k).is_err());
        assert!(ControlRegion::single(0.5, 1.0).validate(&k).is_err());
        assert!(ControlRegion::single(0.3, 0.8).validate(&k).is_ok());
    }
}
