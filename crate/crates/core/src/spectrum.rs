//! Single-particle spectrum of the square trap with an infinite wall at
//! x = 0, depth `V` on `(0, L]`, and zero potential beyond `L`.
//!
//! Internal units throughout: ħ = 2m = 1, so `V = U / L²` and `E = q² − V`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::PhysicalUnits;

/// States with κL below this are treated as unbound.
pub const THRESHOLD_KAPPA_L: f64 = 1e-8;

const BRANCH_OFFSET: f64 = 1e-12;
const ROOT_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trap {
    width: f64,
    depth: f64,
    strength: f64,
}

impl Trap {
    /// Trap from width `L` and depth `V`.
    pub fn new(width: f64, depth: f64) -> Result<Self> {
        check_positive("width", width)?;
        check_positive("depth", depth)?;
        Ok(Self {
            width,
            depth,
            strength: width * width * depth,
        })
    }

    /// Trap from width `L` and dimensionless strength `U = L²V`.
    pub fn from_strength(width: f64, strength: f64) -> Result<Self> {
        check_positive("width", width)?;
        check_positive("strength", strength)?;
        Ok(Self {
            width,
            depth: strength / (width * width),
            strength,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Dimensionless strength U = 2mL²V/ħ².
    pub fn strength(&self) -> f64 {
        self.strength
    }

    fn sqrt_strength(&self) -> f64 {
        self.strength.sqrt()
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTrap(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// A normalized bound eigenstate of a [`Trap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    /// 1-based level index.
    pub index: usize,
    /// Interior wavenumber q.
    pub q: f64,
    /// Exterior decay constant κ.
    pub kappa: f64,
    /// E = q² − V.
    pub energy: f64,
    pub normalization: f64,
    /// ξ = 1/κ.
    pub penetration_length: f64,
    /// Width of the trap this state belongs to.
    pub width: f64,
}

impl BoundState {
    /// φ(x) for x ≥ 0.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bound states live on x >= 0, got x = {x}"
            )));
        }
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        if x < self.width {
            self.normalization * (self.q * x).sin()
        } else {
            self.edge_value() * (-self.kappa * (x - self.width)).exp()
        }
    }

    /// φ(L).
    pub fn edge_value(&self) -> f64 {
        self.normalization * (self.q * self.width).sin()
    }

    /// Residual of the quantization condition κ = −q cot(qL).
    pub fn residual(&self) -> f64 {
        let theta = self.q * self.width;
        self.kappa + self.q * theta.cos() / theta.sin()
    }
}

pub fn evaluate_bound_state(state: &BoundState, x: f64) -> Result<f64> {
    state.value(x)
}

/// Number of levels whose threshold `(j − 1/2)π` lies strictly below √U,
/// before the marginal-state exclusion.
fn threshold_count(trap: &Trap) -> usize {
    let t = trap.sqrt_strength() / PI + 0.5;
    (t.ceil() as usize).saturating_sub(1)
}

/// κL of the top level when it sits just above its threshold, from the
/// expansion κL ≈ (U − θ₀²)/2 with θ₀ = (j − 1/2)π.
fn near_threshold_kappa_l(trap: &Trap, level: usize) -> f64 {
    let theta0 = (level as f64 - 0.5) * PI;
    let root_u = trap.sqrt_strength();
    0.5 * (root_u - theta0) * (root_u + theta0)
}

/// True if the trap has a level so close to its threshold that it is
/// excluded from the capacity.
pub fn is_marginal(trap: &Trap) -> bool {
    let n = threshold_count(trap);
    n > 0 && near_threshold_kappa_l(trap, n) < THRESHOLD_KAPPA_L
}

/// Number of bound states the trap supports.
pub fn capacity(trap: &Trap) -> usize {
    let n = threshold_count(trap);
    if is_marginal(trap) {
        n - 1
    } else {
        n
    }
}

// f(θ) = θ cot θ + √(U − θ²), strictly decreasing on each branch.
fn quantization(theta: f64, strength: f64) -> (f64, f64) {
    let s = (strength - theta * theta).max(0.0).sqrt();
    let (sin, cos) = theta.sin_cos();
    let cot = cos / sin;
    let f = theta * cot + s;
    let df = cot - theta / (sin * sin) - if s > 0.0 { theta / s } else { f64::INFINITY };
    (f, df)
}

fn solve_branch(trap: &Trap, level: usize) -> Result<f64> {
    let u = trap.strength();
    let root_u = trap.sqrt_strength();
    // the offset must stay resolvable next to θ for very deep traps
    let offset = BRANCH_OFFSET.max(8.0 * f64::EPSILON * level as f64 * PI);
    let mut lo = (level as f64 - 0.5) * PI + offset;
    let mut hi = (level as f64 * PI - offset).min(root_u);
    let fail = |reason: String| Error::RootBracket {
        level,
        strength: u,
        reason,
    };
    if !(lo < hi) {
        return Err(fail(format!("empty branch [{lo}, {hi}]")));
    }
    let (f_lo, _) = quantization(lo, u);
    let (f_hi, _) = quantization(hi, u);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(fail(format!("no sign change: f({lo}) = {f_lo}, f({hi}) = {f_hi}")));
    }

    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = quantization(theta, u);
        if f == 0.0 {
            return Ok(theta);
        }
        if f > 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let newton = theta - f / df;
        let next = if df.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - theta).abs();
        theta = next;
        if step <= ROOT_RTOL * theta || hi - lo <= 4.0 * f64::EPSILON * theta {
            return Ok(theta);
        }
    }
    Err(fail("root iteration did not converge".into()))
}

/// All bound states, ordered by level index.
pub fn solve_bound_states(trap: &Trap) -> Result<Vec<BoundState>> {
    if is_marginal(trap) {
        log::warn!(
            "trap with U = {} has a level at threshold; it is excluded from the bound spectrum",
            trap.strength()
        );
    }
    let length = trap.width();
    let u = trap.strength();
    let root_u = trap.sqrt_strength();
    (1..=capacity(trap))
        .map(|j| {
            let theta = solve_branch(trap, j)?;
            let kappa_l = ((root_u - theta) * (root_u + theta)).max(0.0).sqrt();
            if !(kappa_l > 0.0) {
                return Err(Error::RootBracket {
                    level: j,
                    strength: u,
                    reason: "root landed on the continuum threshold".into(),
                });
            }
            let q = theta / length;
            let kappa = kappa_l / length;
            let sin = theta.sin();
            let norm_sq = length / 2.0 - (2.0 * theta).sin() / (4.0 * q) + sin * sin / (2.0 * kappa);
            Ok(BoundState {
                index: j,
                q,
                kappa,
                energy: q * q - trap.depth(),
                normalization: norm_sq.sqrt().recip(),
                penetration_length: kappa.recip(),
                width: length,
            })
        })
        .collect()
}

/// Energy of the `occupied`-th level measured from the trap bottom, E + V.
pub fn highest_occupied_level(trap: &Trap, occupied: usize) -> Result<f64> {
    let cap = capacity(trap);
    if occupied == 0 || occupied > cap {
        return Err(Error::InvalidArgument(format!(
            "occupied level count {occupied} outside 1..={cap}"
        )));
    }
    let states = solve_bound_states(trap)?;
    Ok(states[occupied - 1].energy + trap.depth())
}

/// Scattering eigenstate of incident wavenumber k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringState {
    pub k: f64,
    pub q: f64,
    /// Interior amplitude A.
    pub amplitude: Complex64,
    /// S-matrix element S(k).
    pub s_matrix: Complex64,
    width: f64,
}

impl ScatteringState {
    /// χ_k(x) for x > 0.
    pub fn value(&self, x: f64) -> Complex64 {
        let prefactor = (2.0 * PI).sqrt().recip();
        if x <= self.width {
            prefactor * self.amplitude * (self.q * x).sin()
        } else {
            let phase = Complex64::from_polar(1.0, self.k * x);
            prefactor * (phase.conj() - self.s_matrix * phase)
        }
    }
}

pub fn scattering_state(trap: &Trap, k: f64) -> Result<ScatteringState> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scattering wavenumber must be positive, got {k}"
        )));
    }
    let length = trap.width();
    let q = (k * k + trap.depth()).sqrt();
    let (sin, cos) = (q * length).sin_cos();
    let i = Complex64::i();
    let denominator = q * cos - i * k * sin;
    let numerator = q * cos + i * k * sin;
    let back = Complex64::from_polar(1.0, -k * length);
    Ok(ScatteringState {
        k,
        q,
        amplitude: -2.0 * i * k * back / denominator,
        s_matrix: back * back * numerator / denominator,
        width: length,
    })
}

/// Semiclassical escape time τ = L (m / 2V)^{1/2}, in seconds.
pub fn resonance_lifetime(trap: &Trap, units: &PhysicalUnits) -> f64 {
    // m = 1/2 internally
    let internal = trap.width() / (2.0 * trap.depth().sqrt());
    internal * units.time_scale()
}

/// Lowest half-odd multiple of π at or above √U; the next threshold.
pub fn next_threshold(trap: &Trap) -> f64 {
    (threshold_count(trap) as f64) * PI + FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    const PI2: f64 = PI * PI;

    /// Independent count: sign changes of θ cos θ + √(U − θ²) sin θ on a fine
    /// grid over (0, √U).
    fn count_roots_by_scan(u: f64) -> usize {
        let root_u = u.sqrt();
        let g = |t: f64| t * t.cos() + (u - t * t).max(0.0).sqrt() * t.sin();
        let steps = 200_000;
        let mut count = 0;
        let mut prev = g(1e-9);
        for i in 1..=steps {
            let t = root_u * i as f64 / steps as f64;
            let cur = g(t);
            if prev != 0.0 && cur.signum() != prev.signum() {
                count += 1;
            }
            prev = cur;
        }
        count
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(&Trap::from_strength(1.0, 1e4 * PI2).unwrap()), 100);
        assert_eq!(capacity(&Trap::from_strength(1.0, 1e2 * PI2).unwrap()), 10);
        assert_eq!(capacity(&Trap::from_strength(1.0, PI2 / 16.0).unwrap()), 0);
        assert_eq!(capacity(&Trap::from_strength(1.0, 25.0 * PI2).unwrap()), 5);
        assert_eq!(count_roots_by_scan(25.0 * PI2), 5);
    }

    #[test]
    fn capacity_matches_scan_oracle() {
        for u in [0.5, 3.0, 10.0, 40.0, 25.0 * PI2, 123.4, 900.0] {
            assert_eq!(
                capacity(&Trap::from_strength(1.3, u).unwrap()),
                count_roots_by_scan(u),
                "U = {u}"
            );
        }
    }

    #[test]
    fn exact_threshold_is_excluded() {
        for j in 1..=20 {
            let at = (j as f64 - 0.5) * PI;
            let below = Trap::from_strength(1.0, (at - 1e-6).powi(2)).unwrap();
            let exact = Trap::from_strength(1.0, at * at).unwrap();
            let above = Trap::from_strength(1.0, (at + 1e-6).powi(2)).unwrap();
            assert_eq!(capacity(&below), j - 1);
            assert_eq!(capacity(&exact), j - 1);
            assert_eq!(capacity(&above), j);
            assert_eq!(solve_bound_states(&above).unwrap().len(), j);
        }
    }

    #[test]
    fn infinite_well_limit() {
        let trap = Trap::from_strength(1.0, 1e8 * PI2).unwrap();
        let theta = solve_branch(&trap, 1).unwrap();
        assert!((theta - PI).abs() < 1e-3);
    }

    #[test]
    fn top_state_stays_in_branch() {
        let trap = Trap::from_strength(1.0, 1e2 * PI2).unwrap();
        let states = solve_bound_states(&trap).unwrap();
        let theta = states[9].q;
        assert!(theta > 9.5 * PI && theta < 10.0 * PI);
    }

    #[test]
    fn residuals_are_tiny() {
        for (width, u) in [(1.0, 25.0 * PI2), (0.37, 1e4 * PI2), (2.0, 7.1)] {
            let trap = Trap::from_strength(width, u).unwrap();
            for s in solve_bound_states(&trap).unwrap() {
                assert!(s.residual().abs() < 1e-10 * u.sqrt() / width, "{s:?}");
                assert!(s.kappa > 0.0 && s.energy < 0.0);
                let kappa2 = trap.depth() - s.q * s.q;
                assert!((s.kappa - kappa2.sqrt()).abs() < 1e-9 * u.sqrt() / width);
            }
        }
    }

    #[test]
    fn ordering_and_penetration() {
        let trap = Trap::from_strength(1.0, 400.0).unwrap();
        let states = solve_bound_states(&trap).unwrap();
        for w in states.windows(2) {
            assert!(w[0].q < w[1].q);
            assert!(w[0].penetration_length < w[1].penetration_length);
        }
        for s in &states {
            let theta = s.q * s.width;
            assert!(theta > (s.index as f64 - 0.5) * PI && theta < s.index as f64 * PI);
        }
    }

    #[test]
    fn continuity_at_edge() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        for s in solve_bound_states(&trap).unwrap() {
            let inside = s.normalization * (s.q * s.width).sin();
            let outside = s.value(s.width).unwrap();
            assert!((inside - outside).abs() <= 1e-10 * inside.abs());
            let d_in = s.normalization * s.q * (s.q * s.width).cos();
            let d_out = -s.kappa * outside;
            assert!((d_in - d_out).abs() <= 1e-9 * d_in.abs().max(1.0));
            assert_eq!(s.value(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_position_rejected() {
        let trap = Trap::from_strength(1.0, 30.0).unwrap();
        let s = solve_bound_states(&trap).unwrap()[0];
        assert!(s.value(-1e-3).is_err());
    }

    #[test]
    fn normalization_and_orthogonality_by_quadrature() {
        let trap = Trap::from_strength(1.0, 25.0 * PI2).unwrap();
        let states = solve_bound_states(&trap).unwrap();
        let xi_max = states.last().unwrap().penetration_length;
        let end = trap.width() + 40.0 * xi_max;
        for a in &states {
            let r = integrate(
                |x| a.value_unchecked(x).powi(2),
                0.0,
                a.width + 20.0 * a.penetration_length,
                &[a.width],
                1e-12,
            );
            assert!((r.value - 1.0).abs() < 1e-8, "norm of {} = {}", a.index, r.value);
            for b in &states {
                let r = integrate(
                    |x| a.value_unchecked(x) * b.value_unchecked(x),
                    0.0,
                    end,
                    &[a.width],
                    1e-12,
                );
                let expected = if a.index == b.index { 1.0 } else { 0.0 };
                assert!((r.value - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scattering_at_interior_node() {
        // choose k with qL = π/2 + 3π
        let trap = Trap::from_strength(1.0, 40.0).unwrap();
        let q = 3.5 * PI;
        let k = (q * q - trap.depth()).sqrt();
        let st = scattering_state(&trap, k).unwrap();
        assert!((st.amplitude.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scattering_free_limit_is_wall_reflection() {
        let trap = Trap::from_strength(1.0, 1e-14).unwrap();
        let st = scattering_state(&trap, 2.3).unwrap();
        assert!((st.s_matrix - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn scattering_matches_at_edge() {
        let trap = Trap::from_strength(0.8, 55.0).unwrap();
        for k in [0.1, 1.0, 4.7, 30.0] {
            let st = scattering_state(&trap, k).unwrap();
            let inside = st.value(trap.width());
            let outside = st.value(trap.width() * (1.0 + 1e-12));
            assert!((inside - outside).norm() < 1e-9);
        }
        assert!(scattering_state(&trap, 0.0).is_err());
        assert!(scattering_state(&trap, -1.0).is_err());
    }

    #[test]
    fn occupied_level() {
        let trap = Trap::from_strength(1.0, 1e2 * PI2).unwrap();
        let top = highest_occupied_level(&trap, 10).unwrap();
        assert!(top < trap.depth() && top > 0.9 * trap.depth());
        let mut prev = 0.0;
        for n in 1..=10 {
            let e = highest_occupied_level(&trap, n).unwrap();
            assert!(e > prev);
            prev = e;
        }
        assert!(highest_occupied_level(&trap, 0).is_err());
        assert!(highest_occupied_level(&trap, 11).is_err());
        let deep = Trap::from_strength(1.0, 1e10).unwrap();
        assert!((highest_occupied_level(&deep, 1).unwrap() - PI2).abs() < 1e-3);
    }

    #[test]
    fn lifetime_scaling() {
        let units = PhysicalUnits::sodium_23(50e-6).unwrap();
        let trap = Trap::from_strength(1.0, 1e2 * PI2).unwrap();
        let tau = resonance_lifetime(&trap, &units);
        let deeper = Trap::new(1.0, 2.0 * trap.depth()).unwrap();
        assert!((resonance_lifetime(&deeper, &units) * 2f64.sqrt() / tau - 1.0).abs() < 1e-14);
        // τ = L²m/(ħ√U) in SI
        let l = 50e-6;
        let alt = l * l * units.mass / (units.hbar() * trap.strength().sqrt());
        assert!((alt / tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_traps() {
        assert!(Trap::new(0.0, 1.0).is_err());
        assert!(Trap::new(1.0, -1.0).is_err());
        assert!(Trap::from_strength(1.0, f64::INFINITY).is_err());
        let t = Trap::new(2.0, 3.0).unwrap();
        assert_eq!(t.strength(), 12.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn s_matrix_is_unitary(k in 1e-4f64..200.0, u in 0.1f64..5e4, width in 0.1f64..10.0) {
            let trap = Trap::from_strength(width, u).unwrap();
            let st = scattering_state(&trap, k).unwrap();
            prop_assert!((st.s_matrix.norm() - 1.0).abs() < 1e-12);
        }
    }

    proptest! {

        #[test]
        fn count_equals_capacity(u in 0.01f64..2e4) {
            let trap = Trap::from_strength(1.0, u).unwrap();
            prop_assert_eq!(solve_bound_states(&trap).unwrap().len(), capacity(&trap));
        }
    }
}
