//! Sweep configuration and the table-producing drivers behind each CLI
//! subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::kernel::{build_density_kernel, projected_orbitals, window_edge, window_statistics, Grid};
use crate::overlap::{build_overlap_matrix, fidelity_momentum_limit, fidelity_position_limit};
use crate::scenario::{build_combined_scenario, check_recipe, critical_ratio, Family, Scenario, Strength};
use crate::spectrum::{capacity, resonance_lifetime, solve_bound_states, Trap};
use crate::statistics::{asymptotic_statistics, fidelity_measure, full_statistics, CountingStatistics};
use crate::table::{optional_real, real, Table};
use crate::units::PhysicalUnits;

pub const DEFAULT_FILLINGS: [f64; 4] = [0.2, 0.5, 0.9, 1.0];
pub const DEFAULT_RATIO_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Mode {
    #[serde(rename = "weakening")]
    Weakening,
    #[serde(rename = "squeezing")]
    Squeezing,
    #[serde(rename = "combined")]
    Combined,
    #[serde(rename = "fidelity_vs_Ci")]
    FidelityVsCi,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown mode '{s}'")))
    }
}

fn strength<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    Ok(Option::<Strength>::deserialize(d)?.map(|s| s.0))
}

fn default_fillings() -> Vec<f64> {
    DEFAULT_FILLINGS.to_vec()
}

fn default_window() -> f64 {
    crate::kernel::DEFAULT_WINDOW_FACTOR
}

/// A family of scenarios plus output controls, read from JSON.
///
/// Strengths may be numbers or strings such as `"1e4pi2"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "U_i", default, deserialize_with = "strength")]
    pub initial_strength: Option<f64>,
    #[serde(rename = "U_f", default, deserialize_with = "strength")]
    pub final_strength: Option<f64>,
    #[serde(default = "default_fillings")]
    pub filling_factors: Vec<f64>,
    #[serde(default)]
    pub ratio_grid: Option<Vec<f64>>,
    pub mode: Mode,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_window")]
    pub r_window: f64,
    #[serde(default)]
    pub emit_distribution: bool,
    /// Final level n for `fidelity_vs_Ci`.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub ci_list: Option<Vec<usize>>,
}

impl SweepConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            initial_strength: None,
            final_strength: None,
            filling_factors: default_fillings(),
            ratio_grid: None,
            mode,
            output_path: None,
            r_window: default_window(),
            emit_distribution: false,
            level: None,
            family: None,
            ci_list: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn strengths(&self) -> Result<(f64, f64)> {
        let ui = self
            .initial_strength
            .ok_or_else(|| Error::Config("U_i is required".into()))?;
        let uf = self
            .final_strength
            .ok_or_else(|| Error::Config("U_f is required".into()))?;
        Ok((ui, uf))
    }

    /// Width ratios the sweep visits, after validation.
    pub fn ratios(&self) -> Result<Vec<f64>> {
        let (ui, uf) = self.strengths()?;
        let critical = critical_ratio(ui, uf);
        if critical > 1.0 {
            return Err(Error::Config(format!("U_f = {uf} exceeds U_i = {ui}")));
        }
        match (self.mode, &self.ratio_grid) {
            (Mode::Weakening, None) => Ok(vec![1.0]),
            (Mode::Squeezing, None) => Ok(vec![critical]),
            (Mode::Weakening | Mode::Squeezing, Some(_)) => {
                Err(Error::Config("ratio_grid only applies to the combined mode".into()))
            }
            (Mode::Combined, None) => Ok(uniform_ratios(critical, DEFAULT_RATIO_POINTS)),
            (Mode::Combined, Some(grid)) => {
                if grid.is_empty() {
                    return Err(Error::Config("ratio_grid is empty".into()));
                }
                if let Some(bad) = grid.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
                    return Err(Error::Config(format!("ratio {bad} outside (0, 1]")));
                }
                if let Some(&ratio) = grid.iter().find(|&&r| r < critical * (1.0 - 1e-12)) {
                    return Err(Error::BelowCriticalRatio { ratio, critical });
                }
                Ok(grid.clone())
            }
            (Mode::FidelityVsCi, _) => Err(Error::Config("fidelity sweeps have no ratio grid".into())),
        }
    }

    fn validate_fillings(&self) -> Result<()> {
        if self.filling_factors.is_empty() {
            return Err(Error::Config("filling_factors is empty".into()));
        }
        match self.filling_factors.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            Some(f) => Err(Error::Config(format!("filling factor {f} outside (0, 1]"))),
            None => Ok(()),
        }
    }
}

/// `points` uniform ratios from `critical` to 1 inclusive.
pub fn uniform_ratios(critical: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    1.0
                } else {
                    critical + (1.0 - critical) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub initial_strength: f64,
    pub final_strength: f64,
    pub filling: f64,
    pub scenario: Scenario,
    pub ratio: f64,
    pub final_capacity: usize,
    pub stats: CountingStatistics,
}

pub fn evaluate_scenario(scenario: &Scenario, distribution: bool) -> Result<CountingStatistics> {
    let w = build_overlap_matrix(&scenario.initial, scenario.occupied, &scenario.final_trap)?;
    if distribution {
        full_statistics(&w)
    } else {
        asymptotic_statistics(&w)
    }
}

/// Evaluates one combined-family point.
pub fn sweep_point(ui: f64, uf: f64, ratio: f64, filling: f64, distribution: bool) -> Result<SweepRow> {
    let scenario = build_combined_scenario(ui, uf, ratio, filling)?;
    let stats = evaluate_scenario(&scenario, distribution).map_err(|e| Error::AtPoint {
        params: format!("U_i={ui}, U_f={uf}, filling={filling}, ratio={ratio}"),
        source: Box::new(e),
    })?;
    Ok(SweepRow {
        initial_strength: ui,
        final_strength: uf,
        filling,
        ratio: scenario.final_trap.width() / scenario.initial.width(),
        final_capacity: capacity(&scenario.final_trap),
        scenario,
        stats,
    })
}

/// All sweep points in filling-major, ratio-minor order.
pub fn sweep_rows(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.mode == Mode::FidelityVsCi {
        return Err(Error::Config(
            "fidelity_vs_Ci produces a fidelity table, not sweep rows".into(),
        ));
    }
    config.validate_fillings()?;
    let (ui, uf) = config.strengths()?;
    let ratios = config.ratios()?;
    let points: Vec<(f64, f64)> = config
        .filling_factors
        .iter()
        .flat_map(|&f| ratios.iter().map(move |&r| (f, r)))
        .collect();
    let eval = |&(filling, ratio): &(f64, f64)| sweep_point(ui, uf, ratio, filling, config.emit_distribution);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    points.iter().map(eval).collect()
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "U_i", "U_f", "filling", "N_i", "ratio", "L_f", "V_f", "C_f", "mean", "variance", "fano",
];

fn sweep_header(distribution_levels: Option<usize>) -> Vec<String> {
    let mut header: Vec<String> = SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(c) = distribution_levels {
        header.extend((0..=c).map(|n| format!("P{n}")));
    }
    header
}

fn sweep_record(row: &SweepRow, distribution_levels: Option<usize>) -> Vec<String> {
    let f = &row.scenario.final_trap;
    let mut record = vec![
        real(row.initial_strength),
        real(row.final_strength),
        real(row.filling),
        row.scenario.occupied.to_string(),
        real(row.ratio),
        real(f.width()),
        real(f.depth()),
        row.final_capacity.to_string(),
        real(row.stats.mean),
        real(row.stats.variance),
        optional_real(row.stats.fano),
    ];
    if let Some(c) = distribution_levels {
        let p = row.stats.distribution.as_deref().unwrap_or(&[]);
        record.extend((0..=c).map(|n| real(p.get(n).copied().unwrap_or(0.0))));
    }
    record
}

pub fn sweep_table(rows: &[SweepRow], distribution: bool) -> Table {
    let levels = distribution.then(|| rows.iter().map(|r| r.final_capacity).max().unwrap_or(0));
    let mut table = Table::new(sweep_header(levels));
    for row in rows {
        table.push(sweep_record(row, levels));
    }
    table
}

/// Runs the configured sweep and returns its CSV table.
pub fn run_sweep(config: &SweepConfig) -> Result<Table> {
    if config.mode == Mode::FidelityVsCi {
        let uf = config
            .final_strength
            .ok_or_else(|| Error::Config("U_f is required".into()))?;
        let level = config
            .level
            .ok_or_else(|| Error::Config("level is required for fidelity_vs_Ci".into()))?;
        let family = config
            .family
            .ok_or_else(|| Error::Config("family is required for fidelity_vs_Ci".into()))?;
        let list = config
            .ci_list
            .as_ref()
            .ok_or_else(|| Error::Config("ci_list is required for fidelity_vs_Ci".into()))?;
        return run_fidelity_sweep(uf, level, family, list);
    }
    Ok(sweep_table(&sweep_rows(config)?, config.emit_distribution))
}

/// Single scenario with an optional grid-oracle cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub window_factor: f64,
    /// Grid step in units of the initial width.
    pub step: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            window_factor: crate::kernel::DEFAULT_WINDOW_FACTOR,
            step: 1.0 / 4000.0,
        }
    }
}

/// Grid-integrated statistics of the projected orbitals in
/// [0, L_f + r·max ξ_f].
pub fn oracle_statistics(scenario: &Scenario, settings: OracleSettings) -> Result<CountingStatistics> {
    let w = build_overlap_matrix(&scenario.initial, scenario.occupied, &scenario.final_trap)?;
    let edge = window_edge(&scenario.final_trap, settings.window_factor)?;
    let xi = solve_bound_states(&scenario.final_trap)?
        .last()
        .map_or(0.0, |s| s.penetration_length);
    let x_max = scenario.initial.width().max(edge) + 20.0 * xi;
    let grid = Grid::new(settings.step * scenario.initial.width(), x_max)?;
    let kernel = build_density_kernel(projected_orbitals(&w, &grid)?, grid)?;
    window_statistics(&kernel, edge)
}

pub fn stats_table(row: &SweepRow, oracle: Option<&CountingStatistics>, distribution: bool) -> Table {
    let levels = distribution.then_some(row.final_capacity);
    let mut header = sweep_header(levels);
    let mut record = sweep_record(row, levels);
    if let Some(o) = oracle {
        header.extend(["oracle_mean".to_string(), "oracle_variance".to_string()]);
        record.extend([real(o.mean), real(o.variance)]);
    }
    let mut table = Table::new(header);
    table.push(record);
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityRow {
    pub initial_capacity: usize,
    pub initial: Trap,
    pub fidelity: f64,
    pub position_limit: f64,
    pub momentum_limit: f64,
}

/// F_n along a family of fully loaded initial traps of growing capacity,
/// with the two limiting values for reference. The final trap has unit
/// width.
pub fn fidelity_rows(
    final_strength: f64,
    level: usize,
    family: Family,
    capacities: &[usize],
) -> Result<Vec<FidelityRow>> {
    let final_trap = Trap::from_strength(1.0, final_strength)?;
    let cf = capacity(&final_trap);
    if level == 0 || level > cf {
        return Err(Error::InvalidArgument(format!("level {level} outside 1..={cf}")));
    }
    let target = solve_bound_states(&final_trap)?[level - 1];
    let eval = |&ci: &usize| -> Result<FidelityRow> {
        let initial = family.initial_trap(&final_trap, ci)?;
        let fidelity = fidelity_measure(&final_trap, level, &initial, ci).map_err(|e| Error::AtPoint {
            params: format!("family={}, C_i={ci}", family.as_str()),
            source: Box::new(e),
        })?;
        Ok(FidelityRow {
            initial_capacity: ci,
            initial,
            fidelity,
            position_limit: fidelity_position_limit(&target, initial.width())?,
            momentum_limit: fidelity_momentum_limit(&target, initial.strength().sqrt() / initial.width())?,
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        capacities.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    capacities.iter().map(eval).collect()
}

pub fn run_fidelity_sweep(final_strength: f64, level: usize, family: Family, capacities: &[usize]) -> Result<Table> {
    let rows = fidelity_rows(final_strength, level, family, capacities)?;
    let mut table = Table::new([
        "family",
        "U_f",
        "n",
        "C_i",
        "U_i",
        "L_i",
        "V_i",
        "F_n",
        "position_limit",
        "momentum_limit",
    ]);
    for r in rows {
        table.push(vec![
            family.as_str().to_string(),
            real(final_strength),
            level.to_string(),
            r.initial_capacity.to_string(),
            real(r.initial.strength()),
            real(r.initial.width()),
            real(r.initial.depth()),
            real(r.fidelity),
            real(r.position_limit),
            real(r.momentum_limit),
        ]);
    }
    Ok(table)
}

pub fn spectrum_table(trap: &Trap) -> Result<Table> {
    let mut table = Table::new(["j", "theta", "q", "kappa", "energy", "normalization", "xi"]);
    for s in solve_bound_states(trap)? {
        table.push(vec![
            s.index.to_string(),
            real(s.q * s.width),
            real(s.q),
            real(s.kappa),
            real(s.energy),
            real(s.normalization),
            real(s.penetration_length),
        ]);
    }
    Ok(table)
}

pub fn recipe_table(final_trap: &Trap, initial: &Trap, occupied: usize) -> Result<Table> {
    let r = check_recipe(final_trap, initial, occupied)?;
    let mut table = Table::new(["epsilon_i", "epsilon_f", "spans", "width_margin", "verdict"]);
    table.push(vec![
        real(r.epsilon_i),
        real(r.epsilon_f),
        r.spans.to_string(),
        real(r.width_margin),
        r.verdict.as_str().to_string(),
    ]);
    Ok(table)
}

/// τ for `final_trap` with one internal length unit equal to
/// `units.length_scale`.
pub fn lifetime_table(final_trap: &Trap, units: &PhysicalUnits) -> Table {
    let tau = resonance_lifetime(final_trap, units);
    let mut table = Table::new(["U_f", "L_f_m", "mass_kg", "tau_s", "tau_ms"]);
    table.push(vec![
        real(final_trap.strength()),
        real(final_trap.width() * units.length_scale),
        real(units.mass),
        real(tau),
        real(tau * 1e3),
    ]);
    table
}
