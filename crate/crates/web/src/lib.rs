//! Browser bindings: weight profiles, a forward simulation and a null
//! control on the reference problems. Every call returns a JSON string.

use degenpop::hum::{synthesize_control, HumConfig};
use degenpop::model::{Problem, ModelError};
use degenpop::pde::{solve_forward, Renewal, Scheme};
use degenpop::scenarios;
use degenpop::weights::{CarlemanParams, WeightField, WeightKind};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest lattice the page accepts; keeps a call well under a second.
const MAX_NX: usize = 129;

fn reference(case: &str, nx: usize, nt: usize) -> Result<Problem, String> {
    if nx > MAX_NX || nt > MAX_NX {
        return Err(format!("lattice {nx}x{nt} exceeds {MAX_NX}"));
    }
    let built: Result<Problem, ModelError> = match case {
        "boundary0" => scenarios::reference_boundary(nx, nt),
        "boundary1" => scenarios::reference_boundary1(nx, nt),
        "interior" => scenarios::reference_interior(nx, nt),
        "nondegenerate" => scenarios::reference_nondegenerate(nx, nt),
        other => return Err(format!("unknown case {other:?}")),
    };
    built.map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Profile {
    x: Vec<f64>,
    psi: Vec<f64>,
}

pub fn profile_json(case: &str, nx: usize) -> Result<String, String> {
    let problem = reference(case, nx, 16)?;
    let kind = WeightKind::for_regime(problem.k().regime());
    let field = WeightField::new(kind, CarlemanParams::new(1.0), problem.k(), problem.lattice()).map_err(|e| e.to_string())?;
    let l = problem.lattice();
    let x = (0..l.nx()).map(|i| l.x(i)).collect();
    serde_json::to_string(&Profile { x, psi: field.profile().to_vec() }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Simulation {
    na: usize,
    nx: usize,
    /// `‖y(t_n)‖` per level.
    norms: Vec<f64>,
    /// `y(T)` row-major, age rows first.
    terminal: Vec<f64>,
}

pub fn simulate_json(case: &str, nx: usize, nt: usize) -> Result<String, String> {
    let problem = reference(case, nx, nt)?;
    let y0 = scenarios::reference_datum(&problem);
    let traj = solve_forward(&problem, &y0, None, 0, nt, Renewal::Integral, Scheme::ImplicitEuler).map_err(|e| e.to_string())?;
    let out = Simulation {
        na: problem.lattice().na(),
        nx: problem.lattice().nx(),
        norms: traj.slices().iter().map(|u| problem.norm(u)).collect(),
        terminal: traj.terminal().iter().copied().collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn control_json(case: &str, nx: usize, nt: usize, epsilon: f64) -> Result<String, String> {
    let problem = reference(case, nx, nt)?;
    let y0 = scenarios::reference_datum(&problem);
    let config = HumConfig { epsilon, ..HumConfig::default() };
    let result = synthesize_control(&problem, &y0, &config).map_err(|e| e.to_string())?;
    serde_json::to_string(&result.summary(&problem)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn weight_profile(case: &str, nx: usize) -> Result<String, JsError> {
    profile_json(case, nx).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(case: &str, nx: usize, nt: usize) -> Result<String, JsError> {
    simulate_json(case, nx, nt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn null_control(case: &str, nx: usize, nt: usize, epsilon: f64) -> Result<String, JsError> {
    control_json(case, nx, nt, epsilon).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_has_one_value_per_node() {
        let v: serde_json::Value = serde_json::from_str(&profile_json("interior", 33).unwrap()).unwrap();
        assert_eq!(v["psi"].as_array().unwrap().len(), 33);
    }

    #[test]
    fn simulation_norms_cover_every_level() {
        let v: serde_json::Value = serde_json::from_str(&simulate_json("boundary0", 17, 16).unwrap()).unwrap();
        assert_eq!(v["norms"].as_array().unwrap().len(), 17);
        assert_eq!(v["terminal"].as_array().unwrap().len(), 33 * 17);
    }

    #[test]
    fn control_drives_target_down() {
        let v: serde_json::Value = serde_json::from_str(&control_json("boundary0", 33, 32, 1e-8).unwrap()).unwrap();
        assert!(v["relative_residual"].as_f64().unwrap() < 1e-3);
    }

    #[test]
    fn bad_requests_rejected() {
        assert!(profile_json("nope", 33).is_err());
        assert!(simulate_json("boundary0", 1025, 16).is_err());
    }
}
