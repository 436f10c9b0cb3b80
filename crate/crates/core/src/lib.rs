//! Copolymerization as a continuous-time Markov chain on the tree of monomer
//! sequences.
//!
//! Monomers of `d` types attach to the tip of a growing polymer at rates
//! `k_i^+` and the tip detaches at rates `k_i^-`. The crate provides:
//!
//! - [`model`]: rate sets, polymer states, events, and regime classes;
//! - [`theory`]: the classification parameter `alpha`, the growth-law root
//!   `m`, limiting composition, velocities, the cone-type chain, and the
//!   stationary measure of the recurrent regime;
//! - [`sim`]: exact, seed-deterministic simulation of the chain;
//! - [`analysis`]: empirical observables of a trajectory and comparison
//!   reports against the closed forms.

pub mod analysis;
pub mod model;
pub mod sim;
pub mod theory;

pub use analysis::{BoundaryView, ComparisonReport};
pub use model::{Event, ModelError, MonomerId, Polymer, RateSet, RegimeClass};
pub use sim::{simulate, SimConfig, StopRule, Trajectory};
pub use theory::{summarize, TheoryError, TheorySummary};
