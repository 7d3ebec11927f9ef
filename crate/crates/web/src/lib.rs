//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and strings and returns JSON text, which
//! the page parses and draws. The `*_json` functions hold the logic and are
//! callable (and tested) natively; the `#[wasm_bindgen]` wrappers only convert
//! errors.

use ramsey_duality::cli::{parse_grid, StateSpec};
use ramsey_duality::{
    duality_report, fringe_scan, sweep_regime, JcParams, Regime, DEFAULT_EPS_TRUNC,
};
use wasm_bindgen::prelude::*;

/// Sweeps are capped so a slider drag cannot lock the page.
pub const MAX_SWEEP_POINTS: usize = 201;

fn params(theta: f64, lambda: f64) -> Result<JcParams, String> {
    JcParams::new(theta, lambda).map_err(|e| e.to_string())
}

fn state(spec: &str) -> Result<ramsey_duality::CavityState, String> {
    let spec: StateSpec = spec
        .parse()
        .map_err(|e: ramsey_duality::Error| e.to_string())?;
    spec.build(DEFAULT_EPS_TRUNC).map_err(|e| e.to_string())
}

/// Fringe scan as `{phi_values, p_a, extracted_visibility, extracted_phase}`.
pub fn fringe_json(
    state_spec: &str,
    theta: f64,
    lambda: f64,
    points: usize,
) -> Result<String, String> {
    let scan = fringe_scan(&state(state_spec)?, params(theta, lambda)?, points)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&scan).map_err(|e| e.to_string())
}

pub fn report_json(state_spec: &str, theta: f64, lambda: f64) -> Result<String, String> {
    let report =
        duality_report(&state(state_spec)?, params(theta, lambda)?).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Calibrated sweep rows over coherent intensities.
pub fn sweep_json(regime: &str, nbar_grid: &str, lambda: f64) -> Result<String, String> {
    let regime: Regime = regime
        .parse()
        .map_err(|e: ramsey_duality::Error| e.to_string())?;
    let grid = parse_grid(nbar_grid).map_err(|e| e.to_string())?;
    if grid.len() > MAX_SWEEP_POINTS {
        return Err(format!(
            "at most {MAX_SWEEP_POINTS} grid points, got {}",
            grid.len()
        ));
    }
    let rows = sweep_regime(regime, &grid, lambda, DEFAULT_EPS_TRUNC);
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = fringeScan)]
pub fn fringe_scan_js(
    state_spec: &str,
    theta: f64,
    lambda: f64,
    points: usize,
) -> Result<String, JsError> {
    fringe_json(state_spec, theta, lambda, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = dualityReport)]
pub fn duality_report_js(state_spec: &str, theta: f64, lambda: f64) -> Result<String, JsError> {
    report_json(state_spec, theta, lambda).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sweep)]
pub fn sweep_js(regime: &str, nbar_grid: &str, lambda: f64) -> Result<String, JsError> {
    sweep_json(regime, nbar_grid, lambda).map_err(|e| JsError::new(&e))
}
