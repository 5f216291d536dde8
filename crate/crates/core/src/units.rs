//! Conversion between internal units (ħ = 2m = 1, lengths in units of a
//! chosen length scale) and SI.

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ²³Na, kg.
pub const SODIUM_23_MASS: f64 = 22.989_769_282 * ATOMIC_MASS_UNIT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits {
    /// Particle mass in kg.
    pub mass: f64,
    /// Physical length of one internal length unit, in m.
    pub length_scale: f64,
}

impl PhysicalUnits {
    pub fn new(mass: f64, length_scale: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
        }
        if !(length_scale.is_finite() && length_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "length scale must be positive, got {length_scale}"
            )));
        }
        Ok(Self { mass, length_scale })
    }

    pub fn sodium_23(length_scale: f64) -> Result<Self> {
        Self::new(SODIUM_23_MASS, length_scale)
    }

    pub fn hbar(&self) -> f64 {
        HBAR
    }

    /// One internal energy unit in J: ħ²/(2mℓ²).
    pub fn energy_scale(&self) -> f64 {
        HBAR * HBAR / (2.0 * self.mass * self.length_scale * self.length_scale)
    }

    /// One internal time unit in s: ħ / energy_scale = 2mℓ²/ħ.
    pub fn time_scale(&self) -> f64 {
        HBAR / self.energy_scale()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sodium_mass_matches_tabulated_value() {
        assert!((SODIUM_23_MASS - 3.818e-26).abs() < 1e-29);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(PhysicalUnits::new(0.0, 1.0).is_err());
        assert!(PhysicalUnits::new(1.0, -1.0).is_err());
        assert!(PhysicalUnits::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn energy_times_time_is_hbar() {
        let u = PhysicalUnits::sodium_23(50e-6).unwrap();
        assert!((u.energy_scale() * u.time_scale() / HBAR - 1.0).abs() < 1e-15);
    }
}
