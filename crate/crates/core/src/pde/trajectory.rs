use serde::Serialize;

use crate::model::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Forward,
    AdjointTranspose,
    AdjointCharacteristics,
}

/// Age × space slices at consecutive time levels `first, first + 1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: TrajectoryKind,
    first: usize,
    slices: Vec<Field>,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, first: usize, slices: Vec<Field>) -> Self {
        assert!(!slices.is_empty(), "a trajectory holds at least one slice");
        Self { kind, first, slices }
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    /// Time index of the first slice.
    pub fn first_level(&self) -> usize {
        self.first
    }

    /// Time index of the last slice.
    pub fn last_level(&self) -> usize {
        self.first + self.slices.len() - 1
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Slice at absolute time level `n`.
    pub fn at(&self, n: usize) -> &Field {
        assert!(n >= self.first && n <= self.last_level(), "time level {n} outside trajectory");
        &self.slices[n - self.first]
    }

    pub fn initial(&self) -> &Field {
        &self.slices[0]
    }

    pub fn terminal(&self) -> &Field {
        self.slices.last().expect("nonempty")
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Field> {
        self.slices
    }

    /// Appends `other`, whose first slice must coincide with our last level.
    pub fn concat(mut self, other: Trajectory) -> Self {
        assert_eq!(other.first, self.last_level(), "trajectories must share the hand-over level");
        self.slices.extend(other.slices.into_iter().skip(1));
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().flat_map(|s| s.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}
