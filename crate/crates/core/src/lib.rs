//! Atom-number statistics of a Tonks–Girardeau gas after a sudden reduction
//! of a one-dimensional square trap.
//!
//! The gas maps onto free fermions, so everything reduces to single-particle
//! quantities: the bound spectrum of each trap ([`spectrum`]), overlaps
//! between the two spectra ([`overlap`]), and the determinantal counting
//! statistics built from them ([`statistics`], [`kernel`]). [`scenario`]
//! assembles trap families and parameter sweeps.

pub mod error;
pub mod kernel;
pub mod overlap;
pub mod quadrature;
pub mod scenario;
pub mod spectrum;
pub mod statistics;
pub mod sweep;
pub mod table;
pub mod units;

pub use error::{Error, Result};
pub use overlap::{build_overlap_matrix, OverlapMatrix};
pub use spectrum::{capacity, solve_bound_states, BoundState, Trap};
pub use statistics::{asymptotic_statistics, CountingStatistics};
pub use units::PhysicalUnits;
