//! Seeded simulation of driver behavior archetypes on a multi-lane road.
//!
//! * [`model`]: archetypes, categories and the pairwise payoff model
//! * [`population`]: seeded population generation and lane assignment
//! * [`lane`]: per-lane utility evaluation and running totals
//! * [`stats`]: Mann-Whitney U and effect sizes
//! * [`runner`]: scenarios, comparisons and report files

pub mod lane;
pub mod model;
pub mod population;
pub mod runner;
pub mod stats;

pub use lane::{evaluate_lane, jam_onset_position, running_totals, LaneResult, UtilityKind};
pub use model::{Archetype, Category, ModelParams};
pub use population::{generate_population, MixSpec, Population};
