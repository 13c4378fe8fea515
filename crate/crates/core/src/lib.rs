//! An indirect genetic algorithm for the set covering problem.
//!
//! The GA evolves row permutations together with criterion weights and a
//! crossover-selector gene. A deterministic [decoder](decoder) turns each
//! genome into a feasible cover, and a single-pass
//! [hill-climber](hill_climber) strips redundant columns before the cost is
//! used as fitness. [`bench`] reproduces the usual OR-Library protocol.

pub mod bench;
pub mod crossover;
pub mod decoder;
pub mod evolution;
pub mod genome;
pub mod hill_climber;
pub mod instance;

pub use decoder::{decode, CostRankTable, Variant};
pub use evolution::{run, run_with, GaConfig, RunResult};
pub use genome::{CrossoverKind, Genome, WeightRange};
pub use hill_climber::{fitness, remove_redundant};
pub use instance::{generate_random, Instance, RandomInstanceSpec, Solution};
