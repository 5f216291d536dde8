//! Closed-form overlaps between bound states of two traps, and the
//! momentum-space amplitudes used by the squeezing limit.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::spectrum::{capacity, solve_bound_states, BoundState, Trap};

/// Relative wavenumber separation (in units of 1/L) below which the
/// sin·sin antiderivative switches to its Taylor expansion.
pub const DEGENERACY_GAP: f64 = 1e-6;

const MOMENTUM_TOL: f64 = 1e-8;

/// sin(εa)/ε, continuous through ε = 0.
fn sin_over(eps: f64, a: f64, gap: f64) -> f64 {
    if eps.abs() < gap {
        a - eps * eps * a * a * a / 6.0
    } else {
        (eps * a).sin() / eps
    }
}

/// ∫₀ᵃ sin(αx) sin(βx) dx.
fn sin_sin(alpha: f64, beta: f64, a: f64, gap: f64) -> f64 {
    0.5 * (sin_over(alpha - beta, a, gap) - sin_over(alpha + beta, a, gap))
}

/// ∫ₐᵇ e^{−κ(x−a)} sin(qx) dx, with `b = ∞` allowed.
fn exp_sin(kappa: f64, q: f64, a: f64, b: f64) -> f64 {
    let denominator = kappa * kappa + q * q;
    let antiderivative = |x: f64, decay: f64| decay * (-kappa * (q * x).sin() - q * (q * x).cos()) / denominator;
    let upper = if b.is_finite() {
        antiderivative(b, (-kappa * (b - a)).exp())
    } else {
        0.0
    };
    upper - antiderivative(a, 1.0)
}

/// ⟨φ_f|φ_i⟩ = ∫₀^∞ φ_f(x) φ_i(x) dx for a final state no wider than the
/// initial one.
pub fn overlap(final_state: &BoundState, initial_state: &BoundState) -> Result<f64> {
    let (lf, li) = (final_state.width, initial_state.width);
    if lf > li {
        return Err(Error::InvalidArgument(format!(
            "overlap requires final width <= initial width, got {lf} > {li}"
        )));
    }
    let gap = DEGENERACY_GAP / li;
    let (qf, qi) = (final_state.q, initial_state.q);
    let (kf, ki) = (final_state.kappa, initial_state.kappa);

    let inner = sin_sin(qf, qi, lf, gap);
    let middle = (qf * lf).sin() * exp_sin(kf, qi, lf, li);
    let outer = (qf * lf).sin() * (qi * li).sin() * (-kf * (li - lf)).exp() / (kf + ki);
    Ok(final_state.normalization * initial_state.normalization * (inner + middle + outer))
}

/// Bound-state overlaps between a final trap and the occupied levels of an
/// initial trap. Rows are final levels, columns initial levels.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub entries: DMatrix<f64>,
    pub initial: Trap,
    pub final_trap: Trap,
    pub occupied: usize,
}

impl OverlapMatrix {
    /// Wraps a raw matrix; used for synthetic checks of the statistics.
    pub fn from_entries(entries: DMatrix<f64>, initial: Trap, final_trap: Trap) -> Self {
        let occupied = entries.ncols();
        Self {
            entries,
            initial,
            final_trap,
            occupied,
        }
    }

    pub fn final_levels(&self) -> usize {
        self.entries.nrows()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        self.entries.singular_values().iter().copied().collect()
    }

    /// ‖W‖²_F.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|w| w * w).sum()
    }
}

pub fn build_overlap_matrix(initial: &Trap, occupied: usize, final_trap: &Trap) -> Result<OverlapMatrix> {
    let cap = capacity(initial);
    if occupied == 0 || occupied > cap {
        return Err(Error::InvalidArgument(format!(
            "occupied levels {occupied} outside 1..={cap} of the initial trap"
        )));
    }
    if final_trap.width() > initial.width() {
        return Err(Error::InvalidArgument(format!(
            "final width {} exceeds initial width {}",
            final_trap.width(),
            initial.width()
        )));
    }
    let initial_states = solve_bound_states(initial)?;
    let initial_states = &initial_states[..occupied];
    let final_states = solve_bound_states(final_trap)?;

    let row = |f: &BoundState| -> Result<Vec<f64>> { initial_states.iter().map(|i| overlap(f, i)).collect() };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<Vec<f64>>> = {
        use rayon::prelude::*;
        final_states.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<Vec<f64>>> = final_states.iter().map(row).collect();
    let rows = rows?;

    let entries = DMatrix::from_fn(final_states.len(), occupied, |j, n| rows[j][n]);
    Ok(OverlapMatrix {
        entries,
        initial: *initial,
        final_trap: *final_trap,
        occupied,
    })
}

/// ⟨k⁺|φ⟩ with ⟨x|k⁺⟩ = √(2/π) sin kx.
pub fn momentum_amplitude(state: &BoundState, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be non-negative, got {k}"
        )));
    }
    Ok(momentum_amplitude_unchecked(state, k))
}

fn momentum_amplitude_unchecked(state: &BoundState, k: f64) -> f64 {
    let l = state.width;
    let (q, kappa) = (state.q, state.kappa);
    let inner = sin_sin(k, q, l, DEGENERACY_GAP / l);
    let tail = (q * l).sin() * (kappa * (k * l).sin() + k * (k * l).cos()) / (kappa * kappa + k * k);
    (2.0 / PI).sqrt() * state.normalization * (inner + tail)
}

/// Probability of finding the state in `[0, window]`: the weakening limit of
/// the fidelity, where the initial projector becomes χ_[0, window](x).
pub fn fidelity_position_limit(state: &BoundState, window: f64) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let (l, q, kappa) = (state.width, state.q, state.kappa);
    let interior = |w: f64| w / 2.0 - (2.0 * q * w).sin() / (4.0 * q);
    let mass = if window <= l {
        interior(window)
    } else {
        let sin = (q * l).sin();
        let decay = if window.is_finite() {
            -(-2.0 * kappa * (window - l)).exp_m1()
        } else {
            1.0
        };
        interior(l) + sin * sin * decay / (2.0 * kappa)
    };
    Ok(state.normalization * state.normalization * mass)
}

/// Probability of the state's sine-transform in `[0, cutoff]`: the squeezing
/// limit of the fidelity.
pub fn fidelity_momentum_limit(state: &BoundState, cutoff: f64) -> Result<f64> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff must be positive, got {cutoff}")));
    }
    // the transform decays as k⁻³; beyond this the missing mass is ~1e-9
    let ceiling = 50.0 * (state.q + state.kappa + PI / state.width);
    let upper = cutoff.min(ceiling);
    let panel = PI / state.width;
    let breakpoints: Vec<f64> = std::iter::once(state.q)
        .chain((1..).map(|m| m as f64 * panel).take_while(|&k| k < upper))
        .collect();
    let density = |k: f64| momentum_amplitude_unchecked(state, k).powi(2);
    let r = integrate(density, 0.0, upper, &breakpoints, MOMENTUM_TOL);
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PI2: f64 = PI * PI;

    fn quadrature_overlap(f: &BoundState, i: &BoundState) -> f64 {
        let end = i.width + 40.0 * f.penetration_length.max(i.penetration_length);
        integrate(
            |x| f.value_unchecked(x) * i.value_unchecked(x),
            0.0,
            end,
            &[f.width, i.width],
            1e-13,
        )
        .value
    }

    #[test]
    fn same_trap_is_orthonormal() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        let states = solve_bound_states(&trap).unwrap();
        for a in &states {
            for b in &states {
                let expected = if a.index == b.index { 1.0 } else { 0.0 };
                assert!((overlap(a, b).unwrap() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wider_final_rejected() {
        let narrow = solve_bound_states(&Trap::from_strength(0.5, 50.0).unwrap()).unwrap()[0];
        let wide = solve_bound_states(&Trap::from_strength(1.0, 50.0).unwrap()).unwrap()[0];
        assert!(overlap(&wide, &narrow).is_err());
        assert!(overlap(&narrow, &wide).is_ok());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let initial = Trap::from_strength(1.0, 400.0).unwrap();
        let final_trap = Trap::from_strength(0.7, 100.0).unwrap();
        for f in solve_bound_states(&final_trap).unwrap() {
            for i in solve_bound_states(&initial).unwrap() {
                let exact = overlap(&f, &i).unwrap();
                assert!((exact - quadrature_overlap(&f, &i)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_wavenumbers_are_continuous() {
        let initial = solve_bound_states(&Trap::from_strength(1.0, 300.0).unwrap()).unwrap()[2];
        let mut twin = initial;
        // same q and κ, different exterior: width stays, so degenerate branch
        twin.q = initial.q;
        let exact = overlap(&twin, &initial).unwrap();
        assert!(exact.is_finite());
        assert!((exact - 1.0).abs() < 1e-10);
        let mut nudged = twin;
        nudged.q += 1e-7;
        let near = overlap(&nudged, &initial).unwrap();
        assert!((exact - near).abs() < 1e-5);
    }

    #[test]
    fn sin_over_branches_agree_at_switch() {
        let a = 1.3;
        let gap = 1e-6;
        let below = sin_over(gap * 0.999_999, a, gap);
        let above = sin_over(gap * 1.000_001, a, gap);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn identity_block_for_same_trap() {
        let trap = Trap::from_strength(1.0, 100.0 * PI2).unwrap();
        let w = build_overlap_matrix(&trap, 10, &trap).unwrap();
        assert_eq!(w.entries.shape(), (10, 10));
        assert!((w.entries.clone() - DMatrix::identity(10, 10)).amax() < 1e-10);

        let deep = Trap::from_strength(1.0, 12.0 * 12.0 * PI2).unwrap();
        let w = build_overlap_matrix(&deep, 12, &deep).unwrap();
        assert!((w.entries - DMatrix::identity(12, 12)).amax() < 1e-10);
    }

    #[test]
    fn occupied_out_of_range() {
        let trap = Trap::from_strength(1.0, 100.0 * PI2).unwrap();
        assert!(build_overlap_matrix(&trap, 0, &trap).is_err());
        assert!(build_overlap_matrix(&trap, 11, &trap).is_err());
    }

    #[test]
    fn momentum_amplitude_basics() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        for s in solve_bound_states(&trap).unwrap() {
            assert_eq!(momentum_amplitude(&s, 0.0).unwrap(), 0.0);
            let at = momentum_amplitude(&s, s.q).unwrap();
            let near = momentum_amplitude(&s, s.q + 1e-7).unwrap();
            assert!(at.is_finite() && (at - near).abs() < 1e-5);
        }
        let s = solve_bound_states(&trap).unwrap()[0];
        assert!(momentum_amplitude(&s, -1.0).is_err());
    }

    #[test]
    fn momentum_amplitude_matches_sine_transform() {
        let trap = Trap::from_strength(1.0, 60.0).unwrap();
        let s = solve_bound_states(&trap).unwrap()[1];
        for k in [0.3, 4.0, s.q, 17.0] {
            let numeric = integrate(
                |x| (2.0 / PI).sqrt() * (k * x).sin() * s.value_unchecked(x),
                0.0,
                s.width + 60.0 * s.penetration_length,
                &[s.width],
                1e-13,
            )
            .value;
            assert!((numeric - momentum_amplitude(&s, k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_completeness() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        for s in solve_bound_states(&trap).unwrap() {
            let k_max = s.q + 60.0 / s.penetration_length;
            let total = integrate(
                |k| momentum_amplitude_unchecked(&s, k).powi(2),
                0.0,
                k_max,
                &[s.q],
                1e-10,
            )
            .value;
            assert!((total - 1.0).abs() < 1e-6, "level {}: {}", s.index, total);
        }
    }

    #[test]
    fn position_limit() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        let s = solve_bound_states(&trap).unwrap()[4];
        assert!((fidelity_position_limit(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!((fidelity_position_limit(&s, 1e3).unwrap() - 1.0).abs() < 1e-14);
        let inside = fidelity_position_limit(&s, 1.0).unwrap();
        let expected = s.normalization.powi(2) * (0.5 - (2.0 * s.q).sin() / (4.0 * s.q));
        assert!((inside - expected).abs() < 1e-15 && inside < 1.0);
        for w in [0.3, 1.0, 1.2] {
            let numeric = integrate(|x| s.value_unchecked(x).powi(2), 0.0, w, &[1.0], 1e-13).value;
            assert!((numeric - fidelity_position_limit(&s, w).unwrap()).abs() < 1e-11);
        }
        assert!(fidelity_position_limit(&s, 0.0).is_err());
    }

    #[test]
    fn momentum_limit_endpoints() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        let s = solve_bound_states(&trap).unwrap()[4];
        assert!((fidelity_momentum_limit(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-6);
        assert!(fidelity_momentum_limit(&s, 1e-6).unwrap() < 1e-12);
        let a = fidelity_momentum_limit(&s, s.q).unwrap();
        let b = fidelity_momentum_limit(&s, 2.0 * s.q).unwrap();
        assert!(0.0 < a && a < b && b < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn singular_values_bounded(ui in 20.0f64..3000.0, uf in 5.0f64..500.0, ratio in 0.2f64..1.0) {
            let initial = Trap::from_strength(1.0, ui).unwrap();
            let final_trap = Trap::from_strength(ratio, uf).unwrap();
            prop_assume!(capacity(&final_trap) > 0);
            let w = build_overlap_matrix(&initial, capacity(&initial), &final_trap).unwrap();
            for s in w.singular_values() {
                prop_assert!(s <= 1.0 + 1e-8);
            }
        }
    }
}
