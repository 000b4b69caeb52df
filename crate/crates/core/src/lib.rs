//! Exact solvers, oracles and constructions for the inventory staggering problem.
//!
//! Every item orders `H` units every `T` time units, offset by a shift; the
//! stock of an item drains linearly to zero before its next order. The goal
//! is a shift vector minimizing the peak of the summed inventory.

pub mod arith;
pub mod bounds;
pub mod config;
pub mod coprime;
pub mod error;
pub mod generate;
pub mod hardness;
pub mod interval_ptas;
pub mod io;
pub mod lp_rounding;
pub mod model;
pub mod nested;
pub mod peak;
pub mod ratio;
pub mod rng;

pub use bounds::{average_space_bound, random_regime_check, random_shift_vector, RegimeCheck};
pub use config::SolverConfig;
pub use error::{Error, Result};
pub use model::{cycle_length, item_level, total_level, BigCycle, Instance, Item, Level, Mode, ShiftVector};
pub use rng::RngStream;
pub use peak::{
    brute_optimum, ip_feasible, peak_auto, peak_events, peak_ip, peak_scan, Engine, IpModel, IpWitness,
    OptimumResult, PeakResult,
};
