//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions are what the tests exercise; the `#[wasm_bindgen]`
//! wrappers only convert errors into JavaScript exceptions.

use qrc_core::reservoir::{Reservoir, ReservoirConfig};
use qrc_core::speckle::{ground_state_energy, Boundary, SpeckleGenerator, SpeckleParams};
use wasm_bindgen::prelude::*;

/// Largest reservoir the page offers; the state has 4^N entries.
pub const MAX_DEMO_QUBITS: usize = 6;

fn boundary(periodic: bool) -> Boundary {
    if periodic {
        Boundary::Periodic
    } else {
        Boundary::Dirichlet
    }
}

/// One speckle instance on a box of `k_points` unit grid spacings.
pub fn speckle(
    k_points: usize,
    correlation_length: f64,
    v0: f64,
    seed: u64,
    index: u64,
    periodic: bool,
) -> Result<Vec<f64>, String> {
    let params = SpeckleParams {
        k_points,
        box_length: k_points as f64,
        correlation_length,
        v0,
        dataset_seed: seed,
        n_instances: 1,
        boundary: boundary(periodic),
        ..Default::default()
    };
    let generator = SpeckleGenerator::new(params).map_err(|e| e.to_string())?;
    Ok(generator.generate(index))
}

/// Ground-state energy of the potential on a box with unit grid spacing.
pub fn ground_state(potential: &[f64], periodic: bool) -> Result<f64, String> {
    let params = SpeckleParams {
        k_points: potential.len(),
        box_length: potential.len() as f64 + if periodic { 0.0 } else { 1.0 },
        boundary: boundary(periodic),
        ..Default::default()
    };
    ground_state_energy(potential, &params).map_err(|e| e.to_string())
}

/// ⟨σᶻ_i⟩ after every input step, flattened row-major as K rows of N values.
pub fn sigma_z_trace(potential: &[f64], n_qubits: usize, dt: f64, coupling_seed: u64) -> Result<Vec<f64>, String> {
    if n_qubits > MAX_DEMO_QUBITS {
        return Err(format!("at most {MAX_DEMO_QUBITS} qubits in the demo"));
    }
    let reservoir = Reservoir::new(ReservoirConfig {
        n_qubits,
        dt,
        coupling_seed,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let v_max = potential.iter().copied().fold(0.0, f64::max);
    let rows = reservoir.trace_instance(potential, v_max).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|row| (0..n_qubits).map(move |i| row[3 * i + 2]))
        .collect())
}

#[wasm_bindgen(js_name = speckle)]
pub fn speckle_js(
    k_points: usize,
    correlation_length: f64,
    v0: f64,
    seed: u32,
    index: u32,
    periodic: bool,
) -> Result<Vec<f64>, JsError> {
    speckle(k_points, correlation_length, v0, seed.into(), index.into(), periodic).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = groundState)]
pub fn ground_state_js(potential: &[f64], periodic: bool) -> Result<f64, JsError> {
    ground_state(potential, periodic).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sigmaZTrace)]
pub fn sigma_z_trace_js(potential: &[f64], n_qubits: usize, dt: f64, coupling_seed: u32) -> Result<Vec<f64>, JsError> {
    sigma_z_trace(potential, n_qubits, dt, coupling_seed.into()).map_err(|e| JsError::new(&e))
}
