//! Cross-checks of the closed-form statistics against direct grid
//! integration of the density kernel.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fockprep_core::capacity;
use fockprep_core::scenario::{build_combined_scenario, critical_ratio};
use fockprep_core::sweep::{evaluate_scenario, oracle_statistics, OracleSettings};

#[test]
fn oracle_matches_closed_form_on_random_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 20 {
        let ui: f64 = rng.gen_range(100.0..3000.0);
        let uf = rng.gen_range(10.0..ui.min(800.0));
        let ratio = rng.gen_range(critical_ratio(ui, uf)..=1.0);
        let filling = rng.gen_range(0.1..=1.0);
        let scenario = build_combined_scenario(ui, uf, ratio, filling).unwrap();
        if capacity(&scenario.final_trap) == 0 {
            continue;
        }
        let exact = evaluate_scenario(&scenario, false).unwrap();
        let grid = oracle_statistics(&scenario, OracleSettings::default()).unwrap();
        assert!(
            (exact.mean - grid.mean).abs() < 1e-4 && (exact.variance - grid.variance).abs() < 1e-4,
            "U_i={ui} U_f={uf} ratio={ratio} filling={filling}: {exact:?} vs {grid:?}"
        );
        checked += 1;
    }
}

#[test]
fn oracle_converges_at_second_order() {
    // L_f deliberately off the grid so the kink at the well edge is sampled
    // generically
    let scenario = build_combined_scenario(900.0, 200.0, 0.613_7, 0.7).unwrap();
    let exact = evaluate_scenario(&scenario, false).unwrap();
    let error = |step: f64| {
        let s = oracle_statistics(
            &scenario,
            OracleSettings {
                step,
                ..Default::default()
            },
        )
        .unwrap();
        (s.mean - exact.mean).abs() + (s.variance - exact.variance).abs()
    };
    let coarse = error(1.0 / 500.0);
    let fine = error(1.0 / 1000.0);
    assert!(fine < coarse || fine < 1e-12, "coarse {coarse:.3e}, fine {fine:.3e}");
    if fine > 1e-12 {
        let order = (coarse / fine).log2();
        assert!(order > 1.8, "observed order {order:.2} ({coarse:.3e} -> {fine:.3e})");
    }
}

#[test]
fn full_initial_trap_counts_every_atom() {
    let scenario = build_combined_scenario(400.0 * PI * PI, 400.0 * PI * PI, 1.0, 1.0).unwrap();
    let grid = oracle_statistics(&scenario, OracleSettings::default()).unwrap();
    assert!(
        (grid.mean - 20.0).abs() < 1e-4 && grid.variance.abs() < 1e-4,
        "{grid:?}"
    );
}
