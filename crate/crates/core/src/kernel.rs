//! Grid-sampled one-body density and kernel Δ(x, x′), and the windowed
//! counting statistics computed from them by direct integration.
//!
//! Δ is held in factored form (the sampled orbitals); `delta` evaluates an
//! entry on demand and `delta_matrix` materializes it for small grids.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::overlap::OverlapMatrix;
use crate::spectrum::{solve_bound_states, BoundState, Trap};
use crate::statistics::CountingStatistics;

/// Default window margin factor r in L₊ = L + r·max ξ.
pub const DEFAULT_WINDOW_FACTOR: f64 = 20.0;

/// Uniform grid x_k = k·h on [0, X_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(step: f64, x_max: f64) -> Result<Self> {
        if !(step > 0.0 && x_max >= 0.0 && step.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad grid: step {step}, extent {x_max}")));
        }
        let len = (x_max / step).round() as usize + 1;
        Ok(Self { step, len })
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.x(k))
    }

    /// Trapezoid weights for ∫₀^edge on this grid; the last partial cell
    /// uses the linear interpolant.
    fn window_weights(&self, edge: f64) -> Vec<f64> {
        let h = self.step;
        let mut w = vec![0.0; self.len];
        let full = ((edge / h).floor() as usize).min(self.len - 1);
        for k in 0..full {
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
        let t = (edge - self.x(full)) / h;
        if t > 1e-12 && full + 1 < self.len {
            w[full] += h * t * (1.0 - 0.5 * t);
            w[full + 1] += h * t * 0.5 * t;
        }
        w
    }
}

#[derive(Debug, Clone)]
pub struct DensityKernel {
    pub grid: Grid,
    /// ρ(x) = Σ_n |φ_n(x)|².
    pub rho: Vec<f64>,
    orbitals: Vec<Vec<Complex64>>,
}

impl DensityKernel {
    /// Δ(x_a, x_b) = Σ_n φ_n(x_a)* φ_n(x_b).
    pub fn delta(&self, a: usize, b: usize) -> Complex64 {
        self.orbitals.iter().map(|o| o[a].conj() * o[b]).sum()
    }

    pub fn delta_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.grid.len, self.grid.len, |a, b| self.delta(a, b))
    }

    pub fn orbital_count(&self) -> usize {
        self.orbitals.len()
    }
}

pub fn build_density_kernel(orbitals: Vec<Vec<Complex64>>, grid: Grid) -> Result<DensityKernel> {
    if let Some((n, o)) = orbitals.iter().enumerate().find(|(_, o)| o.len() != grid.len) {
        return Err(Error::InvalidArgument(format!(
            "orbital {n} has {} samples, grid has {}",
            o.len(),
            grid.len
        )));
    }
    let rho = (0..grid.len)
        .map(|k| orbitals.iter().map(|o| o[k].norm_sqr()).sum())
        .collect();
    Ok(DensityKernel { grid, rho, orbitals })
}

/// Counting statistics in the window [0, edge] by trapezoid integration of
/// ρ and |Δ|².
pub fn window_statistics(kernel: &DensityKernel, edge: f64) -> Result<CountingStatistics> {
    let grid = kernel.grid;
    if !(edge >= 0.0) || edge > grid.x_max() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "window edge {edge} outside the grid [0, {}]",
            grid.x_max()
        )));
    }
    let weights = grid.window_weights(edge.min(grid.x_max()));
    let mean: f64 = weights.iter().zip(&kernel.rho).map(|(w, r)| w * r).sum();

    // 2D trapezoid of |Δ|² factorizes into the windowed Gram matrix
    // G_nm = Σ_x w(x) φ_n(x)* φ_m(x): Σ_{x,x'} w w' |Δ|² = Σ_nm |G_nm|².
    let n = kernel.orbitals.len();
    let orbitals = &kernel.orbitals;
    let gram_row = |a: usize| -> Vec<Complex64> {
        (0..n)
            .map(|b| {
                weights
                    .iter()
                    .zip(orbitals[a].iter().zip(&orbitals[b]))
                    .map(|(w, (x, y))| *w * x.conj() * y)
                    .sum()
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Complex64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(gram_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Complex64>> = (0..n).map(gram_row).collect();

    let gram = DMatrix::from_fn(n, n, |a, b| rows[a][b]);
    let variance = mean - gram.iter().map(|g| g.norm_sqr()).sum::<f64>();
    let levels = if n == 0 {
        Vec::new()
    } else {
        gram.symmetric_eigenvalues().iter().copied().collect()
    };
    Ok(CountingStatistics::from_moments(mean, variance, levels))
}

fn sample(states: &[BoundState], coefficients: impl Fn(usize) -> f64, grid: &Grid) -> Vec<Complex64> {
    grid.points()
        .map(|x| {
            let v: f64 = states
                .iter()
                .enumerate()
                .map(|(j, s)| coefficients(j) * s.value_unchecked(x))
                .sum();
            Complex64::new(v, 0.0)
        })
        .collect()
}

/// The `count` lowest bound orbitals of `trap`, sampled on the grid.
pub fn bound_orbitals(trap: &Trap, count: usize, grid: &Grid) -> Result<Vec<Vec<Complex64>>> {
    let states = solve_bound_states(trap)?;
    if count > states.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} orbitals, trap binds {}",
            states.len()
        )));
    }
    Ok(states[..count]
        .iter()
        .map(|s| sample(std::slice::from_ref(s), |_| 1.0, grid))
        .collect())
}

/// Occupied initial orbitals projected onto the final bound subspace,
/// ψ_n(x) = Σ_j W[j][n] φ_j^f(x), sampled on the grid.
pub fn projected_orbitals(w: &OverlapMatrix, grid: &Grid) -> Result<Vec<Vec<Complex64>>> {
    let finals = solve_bound_states(&w.final_trap)?;
    Ok((0..w.entries.ncols())
        .map(|n| sample(&finals, |j| w.entries[(j, n)], grid))
        .collect())
}

/// L₊ = L + r·max_j ξ_j for the given trap.
pub fn window_edge(trap: &Trap, factor: f64) -> Result<f64> {
    let xi = solve_bound_states(trap)?.last().map_or(0.0, |s| s.penetration_length);
    Ok(trap.width() + factor * xi)
}
