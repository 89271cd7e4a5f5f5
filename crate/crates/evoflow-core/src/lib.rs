//! Simulator and verification toolkit for a stochastic evolution model:
//! at every step a birth (probability `p`) attaches an i.i.d. fitness to a
//! new species, and otherwise the least-fit living species dies.
//!
//! Above the critical fitness `(1 - p)/p` the surviving fitnesses fill in
//! the sampling law's shape at density `p`; below it, species keep getting
//! wiped out. The crate provides:
//!
//! - [`chain`]: the step/run engine over an order-statistic population
//!   container ([`population`]), deterministic per seed;
//! - [`trackers`]: streaming statistics of a run (empty-set step counts,
//!   stretch lengths, interval birth counts), mergeable across replicates;
//! - [`oracles`]: exact finite-step reference distributions used as ground
//!   truth in tests;
//! - [`baksneppen`]: the fixed-size ring variant with least-fit-neighborhood
//!   replacement, for empirical comparison.

pub mod baksneppen;
pub mod chain;
pub mod error;
pub mod histogram;
pub mod law;
pub mod oracles;
pub mod params;
pub mod population;
pub mod seeds;
pub mod stats;
pub mod trackers;

pub use chain::{Chain, StepEvent};
pub use error::{Error, Result};
pub use histogram::Histogram;
pub use law::{critical_value, FitnessLaw};
pub use params::{critical_fitness, ModelParams};
pub use population::Population;
pub use seeds::replicate_seed;
pub use trackers::{
    density_estimate, excursion_summary, tail_bound_check, DensityEstimate, ExcursionSummary,
    TailBoundCheck, TrackerConfig, Trackers,
};
