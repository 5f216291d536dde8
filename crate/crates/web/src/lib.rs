//! Browser bindings for the trap-reduction engine.
//!
//! Every export returns a flat `Float64Array`; the page in `www/` unpacks it.
//! The `*_values` functions hold the logic and are callable natively.

use fockprep_core::scenario::build_combined_scenario;
use fockprep_core::statistics::number_distribution;
use fockprep_core::{asymptotic_statistics, build_overlap_matrix, solve_bound_states, Trap};
use wasm_bindgen::prelude::*;

fn message(e: fockprep_core::Error) -> String {
    e.to_string()
}

/// `[ratio, mean, variance]` triples for `points` width ratios spaced evenly
/// from the critical ratio up to 1.
pub fn ratio_sweep_values(
    initial_strength: f64,
    final_strength: f64,
    filling: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err(format!("need at least 2 points, got {points}"));
    }
    let critical = (final_strength / initial_strength).sqrt();
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let ratio = critical + (1.0 - critical) * i as f64 / (points - 1) as f64;
        let s = build_combined_scenario(initial_strength, final_strength, ratio, filling).map_err(message)?;
        let w = build_overlap_matrix(&s.initial, s.occupied, &s.final_trap).map_err(message)?;
        let stats = asymptotic_statistics(&w).map_err(message)?;
        out.extend([ratio, stats.mean, stats.variance]);
    }
    Ok(out)
}

/// Bound-state profiles of a unit-width trap of strength U on
/// `[0, extent]`: `[levels, samples, x_0.., φ_1(x_0).., φ_2(x_0).., ..]`.
pub fn bound_state_values(strength: f64, extent: f64, samples: usize) -> Result<Vec<f64>, String> {
    if samples < 2 || !(extent > 0.0) {
        return Err(format!("bad sampling: {samples} samples on [0, {extent}]"));
    }
    let trap = Trap::from_strength(1.0, strength).map_err(message)?;
    let states = solve_bound_states(&trap).map_err(message)?;
    let xs: Vec<f64> = (0..samples).map(|i| extent * i as f64 / (samples - 1) as f64).collect();
    let mut out = vec![states.len() as f64, samples as f64];
    out.extend(&xs);
    for state in &states {
        for &x in &xs {
            out.push(state.value(x).map_err(message)?);
        }
    }
    Ok(out)
}

/// P(N) for N = 0..=C_f after the combined reduction.
pub fn distribution_values(
    initial_strength: f64,
    final_strength: f64,
    ratio: f64,
    filling: f64,
) -> Result<Vec<f64>, String> {
    let s = build_combined_scenario(initial_strength, final_strength, ratio, filling).map_err(message)?;
    let w = build_overlap_matrix(&s.initial, s.occupied, &s.final_trap).map_err(message)?;
    number_distribution(&w).map_err(message)
}

#[wasm_bindgen]
pub fn ratio_sweep(
    initial_strength: f64,
    final_strength: f64,
    filling: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    ratio_sweep_values(initial_strength, final_strength, filling, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bound_states(strength: f64, extent: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    bound_state_values(strength, extent, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn distribution(initial_strength: f64, final_strength: f64, ratio: f64, filling: f64) -> Result<Vec<f64>, JsError> {
    distribution_values(initial_strength, final_strength, ratio, filling).map_err(|e| JsError::new(&e))
}
