//! Turns a genome into a feasible cover.
//!
//! The decoder walks the row permutation. For every row still uncovered it
//! scores each column covering that row and adds the best one; ties go to the
//! lowest column index. Three scoring rules are supported, see [`Variant`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::genome::{Genome, Weights};
use crate::instance::{Instance, Solution};

/// Decoder scoring rule, plus the self-selecting crossover mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `w2*C2 + w3*C3 - w1*C1` with `C1` the raw column cost.
    Basic,
    /// `w2*C2 + w3*C3 - w1*(C1a + C1b)` with rank-based cost terms.
    NewCost,
    /// New Cost plus `w4*C4a`.
    #[serde(rename = "4criteria")]
    FourCriteria,
    /// Four Criteria scoring with the crossover operator chosen by the genome.
    Iga,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Basic, Variant::NewCost, Variant::FourCriteria, Variant::Iga];

    /// Whether the score uses cost ranks rather than raw cost.
    pub fn uses_ranks(self) -> bool {
        !matches!(self, Variant::Basic)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Basic => "basic",
            Variant::NewCost => "newcost",
            Variant::FourCriteria => "4criteria",
            Variant::Iga => "iga",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Variant::Basic),
            "newcost" | "new-cost" => Ok(Variant::NewCost),
            "4criteria" | "fourcriteria" | "four-criteria" => Ok(Variant::FourCriteria),
            "iga" => Ok(Variant::Iga),
            other => Err(format!("unknown variant `{other}` (expected basic, newcost, 4criteria or iga)")),
        }
    }
}

/// Criterion values for one candidate column at one decoding step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTerms {
    /// Raw column cost.
    pub c1: f64,
    /// Mean cost rank over the currently uncovered rows the column covers.
    pub c1a: f64,
    /// Mean cost rank over all rows the column covers.
    pub c1b: f64,
    /// Currently uncovered rows covered.
    pub c2: f64,
    /// Total rows covered.
    pub c3: f64,
    /// Rows covered that are already covered.
    pub c4a: f64,
}

/// The weighted score of a candidate under `variant`.
pub fn score(terms: &ScoreTerms, weights: &Weights, variant: Variant) -> f64 {
    let [w1, w2, w3, w4] = *weights;
    let coverage = w2 * terms.c2 + w3 * terms.c3;
    match variant {
        Variant::Basic => coverage - w1 * terms.c1,
        Variant::NewCost => coverage - w1 * (terms.c1a + terms.c1b),
        Variant::FourCriteria | Variant::Iga => coverage - w1 * (terms.c1a + terms.c1b) + w4 * terms.c4a,
    }
}

/// Per-row competition ranks of column costs, computed once per instance.
///
/// Within a row, rank 1 is the cheapest covering column; equal costs share the
/// smallest rank, and the next distinct cost gets `1 + (number of strictly
/// cheaper columns)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRankTable {
    /// `ranks[col][k]` is the rank of `col` in row `instance.rows_of_col(col)[k]`.
    ranks: Vec<Vec<u32>>,
    rank_sums: Vec<u64>,
}

impl CostRankTable {
    pub fn new(instance: &Instance) -> Self {
        let mut ranks: Vec<Vec<u32>> =
            (0..instance.num_cols()).map(|c| Vec::with_capacity(instance.rows_of_col(c).len())).collect();
        let mut row_costs = Vec::new();
        // Rows are visited in ascending order, so each column's rank list lines
        // up with its ascending row list.
        for row in 0..instance.num_rows() {
            let cols = instance.cols_of_row(row);
            row_costs.clear();
            row_costs.extend(cols.iter().map(|&c| instance.cost(c)));
            row_costs.sort_unstable();
            for &col in cols {
                let cheaper = row_costs.partition_point(|&c| c < instance.cost(col));
                ranks[col].push(cheaper as u32 + 1);
            }
        }
        let rank_sums = ranks.iter().map(|r| r.iter().map(|&x| u64::from(x)).sum()).collect();
        Self { ranks, rank_sums }
    }

    /// Rank of `col` among the columns covering `row`, if `col` covers it.
    pub fn rank(&self, instance: &Instance, row: usize, col: usize) -> Option<u32> {
        let k = instance.rows_of_col(col).binary_search(&row).ok()?;
        Some(self.ranks[col][k])
    }

    /// Ranks of `col`, aligned with `instance.rows_of_col(col)`.
    pub fn ranks_of_col(&self, col: usize) -> &[u32] {
        &self.ranks[col]
    }

    /// Mean rank of `col` over all rows it covers (`C1b`).
    pub fn mean_rank(&self, col: usize) -> f64 {
        let n = self.ranks[col].len();
        if n == 0 {
            0.0
        } else {
            self.rank_sums[col] as f64 / n as f64
        }
    }
}

/// Mean of a list of cost ranks.
pub fn mean_rank(ranks: &[u32]) -> f64 {
    ranks.iter().map(|&r| f64::from(r)).sum::<f64>() / ranks.len() as f64
}

/// Criterion values for `col` given the columns chosen so far.
pub fn score_terms(instance: &Instance, table: &CostRankTable, partial: &Solution, col: usize) -> ScoreTerms {
    let rows = instance.rows_of_col(col);
    let counts = partial.cover_count();
    let mut uncovered = 0u32;
    let mut uncovered_rank_sum = 0u64;
    for (&row, &rank) in rows.iter().zip(table.ranks_of_col(col)) {
        if counts[row] == 0 {
            uncovered += 1;
            uncovered_rank_sum += u64::from(rank);
        }
    }
    let total = rows.len() as u32;
    debug_assert!(uncovered >= 1, "candidates always cover the row being decoded");
    ScoreTerms {
        c1: f64::from(instance.cost(col)),
        c1a: uncovered_rank_sum as f64 / f64::from(uncovered.max(1)),
        c1b: table.mean_rank(col),
        c2: f64::from(uncovered),
        c3: f64::from(total),
        c4a: f64::from(total - uncovered),
    }
}

/// Builds a feasible cover from `genome`. No redundancy removal is applied.
pub fn decode(instance: &Instance, genome: &Genome, variant: Variant, table: &CostRankTable) -> Solution {
    debug_assert_eq!(genome.perm.len(), instance.num_rows());
    let mut solution = Solution::empty(instance);
    for &row in &genome.perm {
        if solution.is_covered(row) {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &col in instance.cols_of_row(row) {
            let s = score(&score_terms(instance, table, &solution, col), &genome.weights, variant);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((col, s));
            }
        }
        let (col, _) = best.expect("every row has at least one covering column");
        solution.add(instance, col);
    }
    debug_assert!(solution.is_feasible());
    solution
}
