//! Generational GA: rank selection, self-selected order crossover,
//! rank-weighted weight inheritance, mutation, and elitist replacement.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crossover::crossover;
use crate::decoder::{CostRankTable, Variant};
use crate::genome::{rank_population, CrossoverKind, Genome, RatedGenome, WeightRange, Weights};
use crate::hill_climber::fitness;
use crate::instance::{Instance, Solution};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("elite fraction must lie strictly between 0 and 1, got {0}")]
    EliteFraction(f64),
    #[error("elite count {elites} leaves no room for children in a population of {population}")]
    NoChildren { elites: usize, population: usize },
    #[error("mutation rate must lie in [0, 1], got {0}")]
    MutationRate(f64),
    #[error("PUX bias must lie strictly between 0 and 1, got {0}")]
    PuxBias(f64),
    #[error("stall limit must be at least 1")]
    StallLimit,
    #[error("fixed weights must be finite and non-negative, got {0:?}")]
    FixedWeights(Weights),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot select from an empty population")]
pub struct EmptyPopulation;

/// GA parameters. Defaults follow the published parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    /// Fraction of the population kept unchanged each generation (rounded up).
    pub elite_fraction: f64,
    /// Swap mutation probability per child; also the per-gene reset rate of
    /// weight and crossover genes.
    pub mutation_rate: f64,
    /// Probability that PUX keeps a gene of the first parent.
    pub pux_bias: f64,
    /// Stop after this many generations without a strict improvement.
    pub stall_limit: usize,
    /// Hard cap on generations.
    pub max_generations: usize,
    pub variant: Variant,
    pub weight_range: WeightRange,
    /// Freeze every individual's weights to these values.
    pub fixed_weights: Option<Weights>,
    /// Force a crossover operator; without it, IGA follows the genome and all
    /// other variants use PUX.
    pub fixed_crossover: Option<CrossoverKind>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            elite_fraction: 0.2,
            mutation_rate: 0.015,
            pux_bias: 0.66,
            stall_limit: 50,
            max_generations: 10_000,
            variant: Variant::Iga,
            weight_range: WeightRange::default(),
            fixed_weights: None,
            fixed_crossover: None,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_variant(variant: Variant) -> Self {
        Self { variant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(ConfigError::PopulationTooSmall(self.population_size));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(ConfigError::EliteFraction(self.elite_fraction));
        }
        if self.elite_count() >= self.population_size {
            return Err(ConfigError::NoChildren { elites: self.elite_count(), population: self.population_size });
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(ConfigError::MutationRate(self.mutation_rate));
        }
        if !(self.pux_bias > 0.0 && self.pux_bias < 1.0) {
            return Err(ConfigError::PuxBias(self.pux_bias));
        }
        if self.stall_limit == 0 {
            return Err(ConfigError::StallLimit);
        }
        if let Some(w) = self.fixed_weights {
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(ConfigError::FixedWeights(w));
            }
        }
        Ok(())
    }

    /// `ceil(elite_fraction * population_size)`.
    pub fn elite_count(&self) -> usize {
        // The small epsilon keeps 0.2 * 200 at 40 despite 0.2 not being exact in binary.
        ((self.elite_fraction * self.population_size as f64) - 1e-9).ceil().max(1.0) as usize
    }

    /// Crossover used for a pairing whose fitter parent carries `gene`.
    pub fn crossover_for(&self, gene: CrossoverKind) -> CrossoverKind {
        match (self.fixed_crossover, self.variant) {
            (Some(kind), _) => kind,
            (None, Variant::Iga) => gene,
            (None, _) => CrossoverKind::Pux,
        }
    }
}

/// Roulette selection over ranks: a member is drawn with probability
/// `rank / sum(ranks)`.
pub fn rank_select<'a, R: Rng + ?Sized>(
    population: &'a [RatedGenome],
    rng: &mut R,
) -> Result<&'a RatedGenome, EmptyPopulation> {
    let total: u64 = population.iter().map(|r| r.rank as u64).sum();
    if total == 0 {
        return population.first().ok_or(EmptyPopulation);
    }
    let mut ticket = rng.random_range(0..total);
    for member in population {
        let r = member.rank as u64;
        if ticket < r {
            return Ok(member);
        }
        ticket -= r;
    }
    unreachable!("ticket is below the rank total")
}

/// Weights and crossover gene inherited by both children of a pairing.
///
/// Weights are the rank-weighted average of the parents; the crossover gene
/// comes from the higher-ranked parent (`p1` on equal rank).
pub fn cross_auxiliary(p1: &RatedGenome, p2: &RatedGenome) -> (Weights, CrossoverKind) {
    let (r1, r2) = (p1.rank as f64, p2.rank as f64);
    let weights = std::array::from_fn(|k| (r1 * p1.genome.weights[k] + r2 * p2.genome.weights[k]) / (r1 + r2));
    let gene = if p2.rank > p1.rank { p2.genome.crossover } else { p1.genome.crossover };
    (weights, gene)
}

/// Summary of one completed generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best cost seen so far in the run.
    pub best_cost: u64,
    /// Best cost in the current population.
    pub population_best: u64,
    pub mean_cost: f64,
    /// Pairings per crossover kind, indexed by [`CrossoverKind::index`].
    pub crossover_usage: [usize; 3],
    /// Generations since the last strict improvement.
    pub stall: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub best_solution: Solution,
    pub best_cost: u64,
    pub best_genome: Genome,
    pub generations: usize,
    pub evaluations: usize,
    #[serde(serialize_with = "serialize_millis", rename = "elapsed_ms")]
    pub elapsed: Duration,
    /// One entry per generation after the initial population.
    pub history: Vec<GenerationStats>,
}

impl RunResult {
    pub fn crossover_usage(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.history.iter().map(|g| g.crossover_usage)
    }
}

fn serialize_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

pub fn run(instance: &Instance, config: &GaConfig) -> Result<RunResult, ConfigError> {
    run_with(instance, config, &CostRankTable::new(instance), |_| {})
}

/// Runs the GA, calling `observer` after every generation.
///
/// Deterministic in `config.seed`; fitness evaluation of a generation's
/// children runs in parallel but consumes no randomness.
pub fn run_with(
    instance: &Instance,
    config: &GaConfig,
    table: &CostRankTable,
    mut observer: impl FnMut(&GenerationStats),
) -> Result<RunResult, ConfigError> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.population_size;
    let elites = config.elite_count();
    let variant = config.variant;

    let freeze = |g: &mut Genome| {
        if let Some(w) = config.fixed_weights {
            g.weights = w;
        }
    };

    let initial: Vec<Genome> = (0..n)
        .map(|_| {
            let mut g = Genome::random(instance.num_rows(), config.weight_range, &mut rng);
            freeze(&mut g);
            g
        })
        .collect();
    let solutions = evaluate_all(instance, &initial, variant, table);
    let mut evaluations = n;
    let mut births = 0u64;
    let mut population: Vec<RatedGenome> = Vec::with_capacity(n);
    let mut best: Option<(Solution, Genome)> = None;
    for (genome, solution) in initial.into_iter().zip(solutions) {
        consider(&mut best, &solution, &genome);
        population.push(RatedGenome { genome, fitness: solution.cost(), rank: 0, birth_index: births });
        births += 1;
    }
    let mut best_cost = best.as_ref().map(|(s, _)| s.cost()).expect("population is not empty");

    let mut history = Vec::new();
    let mut stall = 0;
    let mut generation = 0;
    while stall < config.stall_limit && generation < config.max_generations {
        rank_population(&mut population);
        let mut usage = [0usize; 3];
        let mut children: Vec<Genome> = Vec::with_capacity(n - elites);
        while children.len() < n - elites {
            let p1 = rank_select(&population, &mut rng).expect("population is not empty");
            let p2 = rank_select(&population, &mut rng).expect("population is not empty");
            let (weights, gene) = cross_auxiliary(p1, p2);
            let kind = config.crossover_for(gene);
            usage[kind.index()] += 1;
            let (c1, c2) = crossover(kind, &p1.genome.perm, &p2.genome.perm, config.pux_bias, &mut rng);
            for perm in [c1, c2] {
                if children.len() == n - elites {
                    break;
                }
                let mut child = Genome { perm, weights, crossover: gene };
                child.swap_mutate(config.mutation_rate, &mut rng);
                child.mutate_auxiliary(config.mutation_rate, config.weight_range, &mut rng);
                freeze(&mut child);
                children.push(child);
            }
        }

        let solutions = evaluate_all(instance, &children, variant, table);
        evaluations += children.len();
        population.truncate(elites);
        for (genome, solution) in children.into_iter().zip(solutions) {
            consider(&mut best, &solution, &genome);
            population.push(RatedGenome { genome, fitness: solution.cost(), rank: 0, birth_index: births });
            births += 1;
        }
        generation += 1;

        let population_best = population.iter().map(|r| r.fitness).min().expect("population is not empty");
        if population_best < best_cost {
            best_cost = population_best;
            stall = 0;
        } else {
            stall += 1;
        }
        let stats = GenerationStats {
            generation,
            best_cost,
            population_best,
            mean_cost: population.iter().map(|r| r.fitness as f64).sum::<f64>() / n as f64,
            crossover_usage: usage,
            stall,
        };
        observer(&stats);
        history.push(stats);
    }

    let (best_solution, best_genome) = best.expect("population is not empty");
    debug_assert_eq!(best_solution.cost(), best_cost);
    Ok(RunResult {
        best_cost,
        best_solution,
        best_genome,
        generations: generation,
        evaluations,
        elapsed: start.elapsed(),
        history,
    })
}

fn evaluate_all(instance: &Instance, genomes: &[Genome], variant: Variant, table: &CostRankTable) -> Vec<Solution> {
    genomes.par_iter().map(|g| fitness(instance, g, variant, table)).collect()
}

fn consider(best: &mut Option<(Solution, Genome)>, solution: &Solution, genome: &Genome) {
    if best.as_ref().is_none_or(|(s, _)| solution.cost() < s.cost()) {
        *best = Some((solution.clone(), genome.clone()));
    }
}
