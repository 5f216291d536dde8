//! Trap-reduction scenarios: the combined weakening/squeezing family, the
//! fidelity families, and the Fock-state recipe check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{capacity, highest_occupied_level, solve_bound_states, Trap};

/// A sudden change from `initial` (lowest `occupied` levels filled) to
/// `final_trap`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub initial: Trap,
    pub occupied: usize,
    pub final_trap: Trap,
    pub label: String,
}

/// L_f^c / L_i = (U_f / U_i)^{1/2}.
pub fn critical_ratio(initial_strength: f64, final_strength: f64) -> f64 {
    (final_strength / initial_strength).sqrt()
}

/// N_i = round(filling · C_i), at least 1.
pub fn occupied_from_filling(initial: &Trap, filling: f64) -> Result<usize> {
    if !(filling > 0.0 && filling <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "filling factor {filling} outside (0, 1]"
        )));
    }
    let cap = capacity(initial);
    if cap == 0 {
        return Err(Error::InvalidArgument(format!(
            "initial trap with U = {} binds no states",
            initial.strength()
        )));
    }
    Ok(((filling * cap as f64).round() as usize).clamp(1, cap))
}

/// Initial trap of unit width and strength `initial_strength`; final trap of
/// width `ratio` in the `final_strength` family.
pub fn build_combined_scenario(
    initial_strength: f64,
    final_strength: f64,
    ratio: f64,
    filling: f64,
) -> Result<Scenario> {
    let initial = Trap::from_strength(1.0, initial_strength)?;
    let critical = critical_ratio(initial_strength, final_strength);
    if critical > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "final strength {final_strength} exceeds initial strength {initial_strength}; no reduction possible"
        )));
    }
    if !(ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!("width ratio {ratio} outside (0, 1]")));
    }
    let ratio = if ratio < critical {
        if ratio < critical * (1.0 - 1e-12) {
            return Err(Error::BelowCriticalRatio { ratio, critical });
        }
        critical
    } else {
        ratio
    };
    let final_trap = Trap::from_strength(ratio, final_strength)?;
    let occupied = occupied_from_filling(&initial, filling)?;
    let label = if ratio == 1.0 {
        "weakening"
    } else if ratio == critical {
        "squeezing"
    } else {
        "combined"
    };
    Ok(Scenario {
        initial,
        occupied,
        final_trap,
        label: label.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Deepen the initial trap at the final width: U_i = C_i²π².
    Weakening,
    /// Widen the initial trap at the final depth until it binds C_i levels.
    Squeezing,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weakening" => Ok(Family::Weakening),
            "squeezing" => Ok(Family::Squeezing),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Weakening => "weakening",
            Family::Squeezing => "squeezing",
        }
    }

    /// Initial trap of capacity `initial_capacity` in this family, relative
    /// to the final trap.
    pub fn initial_trap(&self, final_trap: &Trap, initial_capacity: usize) -> Result<Trap> {
        let root_u = initial_capacity as f64 * PI;
        let trap = match self {
            Family::Weakening => Trap::from_strength(final_trap.width(), root_u * root_u)?,
            Family::Squeezing => {
                let width = root_u / final_trap.depth().sqrt();
                Trap::new(width, final_trap.depth())?
            }
        };
        if trap.width() < final_trap.width() * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "initial capacity {initial_capacity} gives a {} trap narrower than the final one",
                self.as_str()
            )));
        }
        Ok(trap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    Marginal,
    Unsafe,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Safe => "safe",
            Verdict::Marginal => "marginal",
            Verdict::Unsafe => "unsafe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecipeReport {
    /// Highest occupied initial level above the initial trap bottom.
    pub epsilon_i: f64,
    /// Highest final level above the final trap bottom (≃ V_f).
    pub epsilon_f: f64,
    pub spans: bool,
    /// (L_i − L_f) / ξ of the top final level.
    pub width_margin: f64,
    pub verdict: Verdict,
}

const LEVEL_RTOL: f64 = 1e-12;

/// Checks the Fock-state recipe: the initial trap should reach above the
/// final top level in energy (ε_i > ε_f) and extend at least one
/// penetration length of the final top level beyond the final well.
pub fn check_recipe(final_trap: &Trap, initial: &Trap, occupied: usize) -> Result<RecipeReport> {
    let finals = solve_bound_states(final_trap)?;
    let top = finals.last().ok_or_else(|| {
        Error::InvalidArgument(format!("final trap with U = {} binds no states", final_trap.strength()))
    })?;
    let epsilon_f = top.energy + final_trap.depth();
    let epsilon_i = highest_occupied_level(initial, occupied)?;
    let width_margin = (initial.width() - final_trap.width()) / top.penetration_length;

    let tol = LEVEL_RTOL * epsilon_f.abs().max(epsilon_i.abs());
    let spans = epsilon_i > epsilon_f + tol;
    let verdict = if spans && width_margin >= 1.0 {
        Verdict::Safe
    } else if epsilon_i < epsilon_f - tol {
        Verdict::Unsafe
    } else {
        Verdict::Marginal
    };
    Ok(RecipeReport {
        epsilon_i,
        epsilon_f,
        spans,
        width_margin,
        verdict,
    })
}

/// Parses a dimensionless strength: a plain number, or a number followed by
/// `pi2`, `pi^2`, `*pi2` or `*pi^2` meaning a multiple of π².
pub fn parse_strength(text: &str) -> Result<f64> {
    let t: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let (number, scale) = ["*pi^2", "*pi2", "pi^2", "pi2"]
        .iter()
        .find_map(|suffix| t.strip_suffix(suffix).map(|n| (n, PI * PI)))
        .unwrap_or((t.as_str(), 1.0));
    let number = if number.is_empty() && scale != 1.0 { "1" } else { number };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse strength '{text}'")))?;
    let value = value * scale;
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!("strength must be positive, got '{text}'")));
    }
    Ok(value)
}

/// A dimensionless strength U, parsed with [`parse_strength`] from text or
/// taken as a plain JSON number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strength(pub f64);

impl std::str::FromStr for Strength {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_strength(s).map(Strength)
    }
}

impl<'de> Deserialize<'de> for Strength {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let value = match Raw::deserialize(d)? {
            Raw::Number(x) if x.is_finite() && x > 0.0 => x,
            Raw::Number(x) => return Err(serde::de::Error::custom(format!("strength must be positive, got {x}"))),
            Raw::Text(t) => parse_strength(&t).map_err(serde::de::Error::custom)?,
        };
        Ok(Strength(value))
    }
}
