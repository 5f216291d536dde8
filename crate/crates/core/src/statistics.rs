//! Asymptotic trapped-atom statistics after a sudden trap change.
//!
//! With `W[j][n] = ⟨φ_j^f|φ_n^i⟩`, the trapped number operator restricted to
//! the occupied Slater determinant has level probabilities equal to the
//! eigenvalues of `W Wᵀ`; the mean is `‖W‖²_F` and the variance
//! `‖W‖²_F − ‖WᵀW‖²_F`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::overlap::{overlap, OverlapMatrix};
use crate::spectrum::{capacity, solve_bound_states, Trap};

/// Largest singular value of W tolerated before the matrix is rejected.
pub const SINGULAR_VALUE_LIMIT: f64 = 1.0 + 1e-6;

/// Level probabilities outside `[-LEVEL_SLACK, 1 + LEVEL_SLACK]` are errors.
pub const LEVEL_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingStatistics {
    pub mean: f64,
    pub variance: f64,
    /// σ²/⟨N⟩; `None` when ⟨N⟩ = 0.
    pub fano: Option<f64>,
    /// Eigenvalues of the trapped-number kernel, descending.
    pub level_probabilities: Vec<f64>,
    /// P(N) for N = 0..=levels, when requested.
    pub distribution: Option<Vec<f64>>,
}

impl CountingStatistics {
    pub(crate) fn from_moments(mean: f64, variance: f64, mut levels: Vec<f64>) -> Self {
        levels.sort_by(|a, b| b.total_cmp(a));
        Self {
            mean,
            variance,
            fano: (mean > 0.0).then(|| variance / mean),
            level_probabilities: levels,
            distribution: None,
        }
    }

    pub fn is_sub_poissonian(&self) -> Option<bool> {
        self.fano.map(|f| f < 1.0)
    }
}

/// The two forms of the asymptotic mean: summed over occupied initial
/// levels, and summed over final bound levels.
pub fn mean_forms(w: &OverlapMatrix) -> (f64, f64) {
    let e = &w.entries;
    let over_initial = e.column_iter().map(|c| c.norm_squared()).sum();
    let over_final = e.row_iter().map(|r| r.norm_squared()).sum();
    (over_initial, over_final)
}

fn level_probabilities(w: &OverlapMatrix) -> Vec<f64> {
    if w.entries.nrows() == 0 || w.entries.ncols() == 0 {
        return vec![0.0; w.entries.nrows()];
    }
    let gram = &w.entries * w.entries.transpose();
    gram.symmetric_eigenvalues().iter().copied().collect()
}

pub fn asymptotic_statistics(w: &OverlapMatrix) -> Result<CountingStatistics> {
    let largest = w.singular_values().into_iter().fold(0.0, f64::max);
    if largest > SINGULAR_VALUE_LIMIT {
        return Err(Error::OverlapCorrupt(largest));
    }
    let mean = w.frobenius_sq();
    let wtw = w.entries.transpose() * &w.entries;
    let variance = mean - wtw.norm_squared();
    Ok(CountingStatistics::from_moments(mean, variance, level_probabilities(w)))
}

/// Full distribution of the trapped number: a sum of independent Bernoulli
/// variables, one per eigenvalue of `W Wᵀ`.
pub fn number_distribution(w: &OverlapMatrix) -> Result<Vec<f64>> {
    let largest = w.singular_values().into_iter().fold(0.0, f64::max);
    if largest > SINGULAR_VALUE_LIMIT {
        return Err(Error::OverlapCorrupt(largest));
    }
    bernoulli_convolution(&level_probabilities(w))
}

pub(crate) fn bernoulli_convolution(levels: &[f64]) -> Result<Vec<f64>> {
    let mut p = Vec::with_capacity(levels.len() + 1);
    p.push(1.0);
    for &lambda in levels {
        if !(-LEVEL_SLACK..=1.0 + LEVEL_SLACK).contains(&lambda) {
            return Err(Error::LevelProbability(lambda));
        }
        let lambda = lambda.clamp(0.0, 1.0);
        p.push(0.0);
        for n in (1..p.len()).rev() {
            p[n] = p[n] * (1.0 - lambda) + p[n - 1] * lambda;
        }
        p[0] *= 1.0 - lambda;
    }
    Ok(p)
}

/// Statistics with the full distribution attached.
pub fn full_statistics(w: &OverlapMatrix) -> Result<CountingStatistics> {
    let mut stats = asymptotic_statistics(w)?;
    stats.distribution = Some(bernoulli_convolution(&stats.level_probabilities)?);
    Ok(stats)
}

/// F_n = ⟨φ_n^f|Λ_i|φ_n^f⟩ for the `occupied` lowest initial levels.
pub fn fidelity_measure(final_trap: &Trap, level: usize, initial: &Trap, occupied: usize) -> Result<f64> {
    let (cf, ci) = (capacity(final_trap), capacity(initial));
    if level == 0 || level > cf {
        return Err(Error::InvalidArgument(format!("final level {level} outside 1..={cf}")));
    }
    if occupied == 0 || occupied > ci {
        return Err(Error::InvalidArgument(format!(
            "occupied levels {occupied} outside 1..={ci}"
        )));
    }
    let target = solve_bound_states(final_trap)?[level - 1];
    solve_bound_states(initial)?
        .iter()
        .take(occupied)
        .map(|s| overlap(&target, s).map(|o| o * o))
        .sum()
}

/// Infinite-well estimate of the fewest initial atoms for which squeezing
/// can fill the final trap: ⌈C_f L_i / L_f⌉.
pub fn minimum_initial_particles(final_trap: &Trap, initial_width: f64) -> Result<usize> {
    if !(initial_width >= final_trap.width()) {
        return Err(Error::InvalidArgument(format!(
            "initial width {initial_width} is narrower than the final width {}",
            final_trap.width()
        )));
    }
    let estimate = capacity(final_trap) as f64 * initial_width / final_trap.width();
    // absorb round-off so that exact integers are not bumped up
    Ok((estimate - 1e-9 * estimate).ceil() as usize)
}
