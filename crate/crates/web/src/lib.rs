//! Browser bindings: tableau/integral dimension counts, the Hamiltonian
//! screen test, and the Kepler ellipse projected onto the sphere.
//!
//! Every export has a plain Rust twin returning `Result<_, String>` so the
//! logic is testable off the browser.

use projdyn::compat::hamiltonian_test;
use projdyn::exactlin::qi;
use projdyn::polyintegrals::{dim_pbb, PolynomialJson, ScreenIntegral};
use projdyn::screens::{integrate, project_trajectory, ForceField, Screen, ScreenSpec};
use projdyn::young::{young_dim, YoungTableau};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Deserialize)]
struct IntegralInput {
    screen: ScreenSpec,
    t: PolynomialJson,
}

#[derive(Serialize)]
struct Counts {
    young: usize,
    pbb: String,
}

/// Dimension of the Young symmetry class with row lengths `rows` ("2,2") in
/// dimension `dim`; for a rectangle `(b, b)` also `dim P^(b,b)`, which the two
/// must agree on.
pub fn dimension_counts(rows: &str, dim: usize) -> Result<String, String> {
    let rows: Vec<usize> = rows
        .split(',')
        .map(|r| r.trim().parse::<usize>().map_err(|e| format!("row length {r:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if !(2..=6).contains(&dim) {
        return Err("dimension must be between 2 and 6".into());
    }
    if rows.iter().sum::<usize>() > 8 {
        return Err("at most 8 boxes in the browser".into());
    }
    let y = YoungTableau::horizontal(&rows).map_err(|e| e.to_string())?;
    let young = young_dim(&y, dim).map_err(|e| e.to_string())?;
    let b = rows[0] as u64;
    let pbb = if rows.len() == 2 && rows[0] == rows[1] { dim_pbb(dim as u64 - 1, b).to_string() } else { "-".into() };
    serde_json::to_string(&Counts { young, pbb }).map_err(|e| e.to_string())
}

/// Runs the Hamiltonian screen test on `{"screen": ..., "t": Polynomial}`.
pub fn hamiltonian_report(input: &str) -> Result<String, String> {
    let inp: IntegralInput =
        serde_json::from_str(input).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    let h = Screen::from_spec(&inp.screen).map_err(|e| e.to_string())?;
    let expected = PolynomialJson::phase_vars(h.dim());
    if inp.t.vars != expected {
        return Err(format!("\"vars\" must be {expected:?}"));
    }
    let p = inp.t.to_poly().map_err(|e| e.to_string())?;
    let t = ScreenIntegral::from_poly(h.dim(), p).map_err(|e| e.to_string())?;
    hamiltonian_test(&t, &h).map(|r| r.to_json()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Orbit {
    flat: Vec<[f64; 2]>,
    sphere: Vec<[f64; 3]>,
}

/// Kepler orbit from `(1, 0)` with velocity `(0, speed)` on the plane
/// `q₂ = 1`, and its central projection to the unit sphere.
pub fn kepler_orbit(speed: f64, t1: f64) -> Result<String, String> {
    if !(speed > 0.1 && speed < 1.4) || !(t1 > 0.0 && t1 <= 50.0) {
        return Err("speed must lie in (0.1, 1.4) and time in (0, 50]".into());
    }
    let flat = Screen::flat(3);
    let f = ForceField::kepler_flat(3, qi(1));
    let traj = integrate(&flat, &f, &[1.0, 0.0, 1.0], &[0.0, speed, 0.0], (0.0, t1), 1e-10).map_err(|e| e.to_string())?;
    let proj = project_trajectory(&traj, &Screen::unit_sphere(3)).map_err(|e| e.to_string())?;
    let orbit = Orbit {
        flat: traj.states.iter().map(|(q, _)| [q[0], q[1]]).collect(),
        sphere: proj.sample.states.iter().map(|(q, _)| [q[0], q[1], q[2]]).collect(),
    };
    serde_json::to_string(&orbit).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = dimensionCounts)]
pub fn dimension_counts_js(rows: &str, dim: usize) -> Result<String, JsValue> {
    dimension_counts(rows, dim).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = hamiltonianTest)]
pub fn hamiltonian_test_js(input: &str) -> Result<String, JsValue> {
    hamiltonian_report(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = keplerOrbit)]
pub fn kepler_orbit_js(speed: f64, t1: f64) -> Result<String, JsValue> {
    kepler_orbit(speed, t1).map_err(|e| JsValue::from_str(&e))
}
