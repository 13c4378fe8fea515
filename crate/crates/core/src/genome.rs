//! The GA's search representation: a row permutation, four criterion
//! weights, and a gene selecting the crossover operator.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Order-based crossover operators a genome can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverKind {
    OnePoint,
    Pux,
    Pmx,
}

impl CrossoverKind {
    pub const ALL: [CrossoverKind; 3] = [CrossoverKind::OnePoint, CrossoverKind::Pux, CrossoverKind::Pmx];

    pub fn index(self) -> usize {
        match self {
            CrossoverKind::OnePoint => 0,
            CrossoverKind::Pux => 1,
            CrossoverKind::Pmx => 2,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.random_range(0..Self::ALL.len())]
    }
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossoverKind::OnePoint => "1point",
            CrossoverKind::Pux => "pux",
            CrossoverKind::Pmx => "pmx",
        })
    }
}

impl FromStr for CrossoverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "1point" | "onepoint" | "1" => Ok(CrossoverKind::OnePoint),
            "pux" | "2" => Ok(CrossoverKind::Pux),
            "pmx" | "3" => Ok(CrossoverKind::Pmx),
            other => Err(format!("unknown crossover `{other}` (expected 1point, pux or pmx)")),
        }
    }
}

/// Closed interval from which weight genes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRange {
    pub min: f64,
    pub max: f64,
}

impl WeightRange {
    pub fn new(min: f64, max: f64) -> Option<Self> {
        (min.is_finite() && max.is_finite() && 0.0 <= min && min <= max).then_some(Self { min, max })
    }

    pub fn contains(&self, w: f64) -> bool {
        self.min <= w && w <= self.max
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

impl Default for WeightRange {
    fn default() -> Self {
        Self { min: 0.0, max: 100.0 }
    }
}

/// Number of weight genes (criteria 1 to 4).
pub const NUM_WEIGHTS: usize = 4;

pub type Weights = [f64; NUM_WEIGHTS];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    /// Order in which the decoder visits rows.
    pub perm: Vec<usize>,
    /// Criterion weights `w1..w4`; the Basic and New Cost decoders ignore `w4`.
    pub weights: Weights,
    pub crossover: CrossoverKind,
}

/// Which auxiliary genes were reset by [`Genome::mutate_auxiliary`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuxReset {
    pub weights: [bool; NUM_WEIGHTS],
    pub crossover: bool,
}

impl Genome {
    /// A uniformly random genome over `num_rows` rows.
    pub fn random<R: Rng + ?Sized>(num_rows: usize, range: WeightRange, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..num_rows).collect();
        perm.shuffle(rng);
        let weights = std::array::from_fn(|_| range.sample(rng));
        Self { perm, weights, crossover: CrossoverKind::random(rng) }
    }

    /// With probability `rate`, exchanges two distinct positions of the permutation.
    ///
    /// Returns whether a swap happened.
    pub fn swap_mutate<R: Rng + ?Sized>(&mut self, rate: f64, rng: &mut R) -> bool {
        let m = self.perm.len();
        if m < 2 || !rng.random_bool(rate) {
            return false;
        }
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        self.perm.swap(i, j);
        true
    }

    /// Resets each weight gene, and the crossover gene, independently with probability `rate`.
    pub fn mutate_auxiliary<R: Rng + ?Sized>(&mut self, rate: f64, range: WeightRange, rng: &mut R) -> AuxReset {
        let mut reset = AuxReset::default();
        for (w, flag) in self.weights.iter_mut().zip(reset.weights.iter_mut()) {
            if rng.random_bool(rate) {
                *w = range.sample(rng);
                *flag = true;
            }
        }
        if rng.random_bool(rate) {
            self.crossover = CrossoverKind::random(rng);
            reset.crossover = true;
        }
        reset
    }

    /// True iff `perm` holds every index in `0..len` exactly once.
    pub fn is_permutation(&self) -> bool {
        is_permutation(&self.perm)
    }
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&g| g < seen.len() && !std::mem::replace(&mut seen[g], true))
}

/// A genome with its fitness and rank inside a population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatedGenome {
    pub genome: Genome,
    /// Cost after hill-climbing; lower is better.
    pub fitness: u64,
    /// Position in the ranking; the fittest member of a population of `N` has rank `N`.
    pub rank: usize,
    /// Creation order; ties in fitness favour the lower value.
    pub birth_index: u64,
}

/// Assigns ranks `N..=1` by ascending fitness and sorts the slice fittest-first.
///
/// Equal fitness is ordered by lower birth index first.
pub fn rank_population(population: &mut [RatedGenome]) {
    population.sort_by_key(|r| (r.fitness, r.birth_index));
    let n = population.len();
    for (i, member) in population.iter_mut().enumerate() {
        member.rank = n - i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_row_genome() {
        for seed in 0..10 {
            assert_eq!(Genome::random(1, WeightRange::default(), &mut rng(seed)).perm, vec![0]);
        }
    }

    #[test]
    fn random_genome_is_valid_and_deterministic() {
        let range = WeightRange::default();
        for seed in 0..50 {
            let g = Genome::random(37, range, &mut rng(seed));
            let mut sorted = g.perm.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..37).collect::<Vec<_>>());
            assert!(g.weights.iter().all(|&w| range.contains(w)));
        }
        let a = Genome::random(5, range, &mut rng(9));
        let b = Genome::random(5, range, &mut rng(9));
        assert_eq!(a, b);
    }

    #[test]
    fn crossover_gene_covers_all_kinds() {
        let mut r = rng(1);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            counts[Genome::random(3, WeightRange::default(), &mut r).crossover.index()] += 1;
        }
        assert!(counts.iter().all(|&c| (900..=1100).contains(&c)), "{counts:?}");
    }

    #[test]
    fn swap_mutation() {
        let mut r = rng(2);
        let g = Genome::random(5, WeightRange::default(), &mut r);
        let mut same = g.clone();
        for _ in 0..100 {
            assert!(!same.swap_mutate(0.0, &mut r));
        }
        assert_eq!(same, g);

        let mut two = Genome { perm: vec![0, 1], weights: [1.0; 4], crossover: CrossoverKind::Pux };
        assert!(two.swap_mutate(1.0, &mut r));
        assert_eq!(two.perm, vec![1, 0]);

        for seed in 0..100 {
            let mut m = g.clone();
            m.swap_mutate(1.0, &mut rng(seed));
            let diff = m.perm.iter().zip(&g.perm).filter(|(a, b)| a != b).count();
            assert_eq!(diff, 2);
            assert!(m.is_permutation());
            assert_eq!(m.weights, g.weights);
        }
    }

    #[test]
    fn auxiliary_mutation_extremes() {
        let range = WeightRange::new(0.0, 100.0).unwrap();
        let mut r = rng(3);
        let g = Genome::random(6, range, &mut r);
        let mut same = g.clone();
        assert_eq!(same.mutate_auxiliary(0.0, range, &mut r), AuxReset::default());
        assert_eq!(same, g);

        let narrow = WeightRange::new(200.0, 300.0).unwrap();
        let mut all = g.clone();
        let reset = all.mutate_auxiliary(1.0, narrow, &mut r);
        assert!(reset.weights.iter().all(|&b| b) && reset.crossover);
        assert!(all.weights.iter().all(|&w| narrow.contains(w)));
        assert_eq!(all.perm, g.perm);
    }

    #[test]
    fn auxiliary_mutation_rate_is_per_gene() {
        let range = WeightRange::default();
        let mut r = rng(4);
        let mut g = Genome::random(4, range, &mut r);
        let trials = 10_000;
        let mut counts = [0usize; 5];
        for _ in 0..trials {
            let reset = g.mutate_auxiliary(0.5, range, &mut r);
            for (count, hit) in counts.iter_mut().zip(reset.weights) {
                *count += hit as usize;
            }
            counts[4] += reset.crossover as usize;
        }
        for c in counts {
            let frac = c as f64 / trials as f64;
            assert!((frac - 0.5).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn ranking_breaks_ties_by_birth() {
        let g = Genome { perm: vec![0], weights: [0.0; 4], crossover: CrossoverKind::Pux };
        let mk = |fitness, birth_index| RatedGenome { genome: g.clone(), fitness, rank: 0, birth_index };
        let mut pop = vec![mk(10, 3), mk(5, 7), mk(10, 1), mk(20, 0)];
        rank_population(&mut pop);
        let order: Vec<_> = pop.iter().map(|r| (r.fitness, r.birth_index, r.rank)).collect();
        assert_eq!(order, vec![(5, 7, 4), (10, 1, 3), (10, 3, 2), (20, 0, 1)]);
    }

    #[test]
    fn permutation_check() {
        assert!(is_permutation(&[2, 0, 1]));
        assert!(!is_permutation(&[0, 0, 1]));
        assert!(!is_permutation(&[0, 3, 1]));
        assert!(is_permutation(&[]));
    }

    #[test]
    fn crossover_names_parse() {
        for kind in CrossoverKind::ALL {
            assert_eq!(kind.to_string().parse::<CrossoverKind>().unwrap(), kind);
        }
        assert!("ox".parse::<CrossoverKind>().is_err());
    }
}
