//! Simulation, null-control synthesis and inequality checks for a linear
//! age- and space-structured population model with degenerate diffusion.

pub mod model;
pub mod quadrature;
pub mod weights;
pub mod pde;
pub mod scenarios;
pub mod hum;
pub mod verify;
pub mod export;
pub mod jobs;
pub mod selftest;
