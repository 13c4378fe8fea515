//! Set covering instances, solutions, and the OR-Library text format.
//!
//! An instance is a sparse 0-1 matrix stored twice: the columns covering each
//! row and the rows covered by each column. Indices are 0-based everywhere in
//! this crate; the 1-based indices of the OR-Library files are translated in
//! [`Instance::parse_orlib`] and [`Instance::to_orlib`] only.

use std::fmt::Write as _;
use std::io::Read;
use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Errors raised while building or parsing an [`Instance`].
#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("instance must have at least one row and one column (got {rows}x{cols})")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("column index {col} outside 0..{num_cols}")]
    UnknownColumn { col: usize, num_cols: usize },
    #[error("expected {expected} costs, found {found}")]
    CostCountMismatch { expected: usize, found: usize },
    #[error("column {col} has non-positive cost {cost}")]
    NonPositiveCost { col: usize, cost: i64 },
    #[error("row {row} references column {col}, outside 0..{num_cols}")]
    ColumnOutOfRange { row: usize, col: usize, num_cols: usize },
    #[error("column {col} references row {row}, outside 0..{num_rows}")]
    RowOutOfRange { col: usize, row: usize, num_rows: usize },
    #[error("row {row} lists column {col} more than once")]
    DuplicateColumn { row: usize, col: usize },
    #[error("column {col} lists row {row} more than once")]
    DuplicateRow { col: usize, row: usize },
    #[error("row {row} is not covered by any column")]
    UncoveredRow { row: usize },
    #[error("density must lie in (0, 1], got {0}")]
    InvalidDensity(f64),
    #[error("cost range {lo}..={hi} is empty or contains zero")]
    InvalidCostRange { lo: u32, hi: u32 },
}

/// Errors raised by the OR-Library parser, with token position context.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("I/O error while reading instance: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected end of input at token {token} while reading {expected}")]
    Truncated { token: usize, expected: String },
    #[error("line {line}, token {token}: `{text}` is not an integer")]
    NotAnInteger { line: usize, token: usize, text: String },
    #[error("line {line}, token {token}: {what} must be positive, got {value}")]
    NotPositive { line: usize, token: usize, what: String, value: i64 },
    #[error("line {line}, token {token}: column index {value} for row {row} outside [1, {num_cols}]")]
    ColumnOutOfRange { line: usize, token: usize, row: usize, value: i64, num_cols: usize },
    #[error("line {line}, token {token}: unexpected trailing token `{text}`")]
    TrailingToken { line: usize, token: usize, text: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: InstanceError,
    },
}

/// A validated set covering instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    costs: Vec<u32>,
    cols_of_row: Vec<Vec<usize>>,
    rows_of_col: Vec<Vec<usize>>,
}

impl Instance {
    /// Builds an instance from column costs and, for every row, the columns covering it.
    ///
    /// Lists are sorted on construction; duplicates are rejected.
    pub fn from_rows(costs: Vec<u32>, cols_of_row: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        let num_cols = costs.len();
        let num_rows = cols_of_row.len();
        if num_rows == 0 || num_cols == 0 {
            return Err(InstanceError::EmptyDimensions { rows: num_rows, cols: num_cols });
        }
        if let Some(col) = costs.iter().position(|&c| c == 0) {
            return Err(InstanceError::NonPositiveCost { col, cost: 0 });
        }
        let mut cols_of_row = cols_of_row;
        let mut rows_of_col = vec![Vec::new(); num_cols];
        for (row, cols) in cols_of_row.iter_mut().enumerate() {
            if cols.is_empty() {
                return Err(InstanceError::UncoveredRow { row });
            }
            cols.sort_unstable();
            if let Some(w) = cols.windows(2).find(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateColumn { row, col: w[0] });
            }
            for &col in cols.iter() {
                if col >= num_cols {
                    return Err(InstanceError::ColumnOutOfRange { row, col, num_cols });
                }
                rows_of_col[col].push(row);
            }
        }
        Ok(Self { costs, cols_of_row, rows_of_col })
    }

    /// Builds an instance from column costs and the rows each column covers.
    pub fn from_columns(num_rows: usize, costs: Vec<u32>, rows_of_col: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        if rows_of_col.len() != costs.len() {
            return Err(InstanceError::CostCountMismatch { expected: rows_of_col.len(), found: costs.len() });
        }
        let mut cols_of_row = vec![Vec::new(); num_rows];
        for (col, rows) in rows_of_col.iter().enumerate() {
            let mut seen = rows.clone();
            seen.sort_unstable();
            if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateRow { col, row: w[0] });
            }
            for &row in rows {
                if row >= num_rows {
                    return Err(InstanceError::RowOutOfRange { col, row, num_rows });
                }
                cols_of_row[row].push(col);
            }
        }
        Self::from_rows(costs, cols_of_row)
    }

    pub fn num_rows(&self) -> usize {
        self.cols_of_row.len()
    }

    pub fn num_cols(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[u32] {
        &self.costs
    }

    pub fn cost(&self, col: usize) -> u32 {
        self.costs[col]
    }

    /// Columns covering `row`, ascending.
    pub fn cols_of_row(&self, row: usize) -> &[usize] {
        &self.cols_of_row[row]
    }

    /// Rows covered by `col`, ascending.
    pub fn rows_of_col(&self, col: usize) -> &[usize] {
        &self.rows_of_col[col]
    }

    /// Number of nonzero cells in the matrix.
    pub fn nonzeros(&self) -> usize {
        self.cols_of_row.iter().map(Vec::len).sum()
    }

    /// Measured density: nonzeros / (m * n).
    pub fn density(&self) -> f64 {
        self.nonzeros() as f64 / (self.num_rows() as f64 * self.num_cols() as f64)
    }

    /// Rebuilds the instance from its column-wise lists.
    ///
    /// Returns an instance equal to `self`; used to check that the two
    /// adjacency views are exact transposes.
    pub fn retransposed(&self) -> Self {
        Self::from_columns(self.num_rows(), self.costs.clone(), self.rows_of_col.clone())
            .expect("a valid instance rebuilds from its own columns")
    }

    /// Evaluates a set of chosen columns.
    ///
    /// Duplicate indices are collapsed.
    pub fn evaluate(&self, chosen: &[usize]) -> Result<Solution, InstanceError> {
        let mut solution = Solution::empty(self);
        for &col in chosen {
            if col >= self.num_cols() {
                return Err(InstanceError::UnknownColumn { col, num_cols: self.num_cols() });
            }
            if !solution.contains(col) {
                solution.add(self, col);
            }
        }
        Ok(solution)
    }

    /// Reads an instance in the OR-Library SCP layout.
    pub fn parse_orlib(text: &str) -> Result<Self, ParseError> {
        OrlibReader::new(text).read()
    }

    /// Reads an OR-Library instance from any byte stream.
    pub fn read_orlib<R: Read>(mut reader: R) -> Result<Self, ParseError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_orlib(&text)
    }

    /// Writes the instance in the OR-Library SCP layout (12 integers per line).
    pub fn to_orlib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, " {} {}", self.num_rows(), self.num_cols());
        write_wrapped(&mut out, self.costs.iter().map(|&c| c as usize));
        for cols in &self.cols_of_row {
            let _ = writeln!(out, " {}", cols.len());
            write_wrapped(&mut out, cols.iter().map(|&c| c + 1));
        }
        out
    }
}

fn write_wrapped(out: &mut String, values: impl Iterator<Item = usize>) {
    let mut on_line = 0;
    for v in values {
        let _ = write!(out, " {v}");
        on_line += 1;
        if on_line == 12 {
            out.push('\n');
            on_line = 0;
        }
    }
    if on_line > 0 {
        out.push('\n');
    }
}

struct OrlibReader<'a> {
    tokens: Vec<(usize, &'a str)>,
    index: usize,
    line: usize,
}

impl<'a> OrlibReader<'a> {
    fn new(text: &'a str) -> Self {
        let tokens =
            text.lines().enumerate().flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t))).collect();
        Self { tokens, index: 0, line: 1 }
    }

    fn next_int(&mut self, expected: impl FnOnce() -> String) -> Result<i64, ParseError> {
        let (line, text) = *self
            .tokens
            .get(self.index)
            .ok_or_else(|| ParseError::Truncated { token: self.index + 1, expected: expected() })?;
        self.index += 1;
        self.line = line;
        text.parse::<i64>().map_err(|_| ParseError::NotAnInteger { line, token: self.index, text: text.to_string() })
    }

    fn positive(&mut self, what: impl Fn() -> String) -> Result<i64, ParseError> {
        let value = self.next_int(&what)?;
        if value <= 0 {
            return Err(ParseError::NotPositive { line: self.line, token: self.index, what: what(), value });
        }
        Ok(value)
    }

    fn read(mut self) -> Result<Instance, ParseError> {
        let num_rows = self.positive(|| "number of rows".into())? as usize;
        let num_cols = self.positive(|| "number of columns".into())? as usize;
        let mut costs = Vec::with_capacity(num_cols);
        for j in 0..num_cols {
            let cost = self.positive(|| format!("cost of column {}", j + 1))?;
            let cost = u32::try_from(cost).map_err(|_| ParseError::NotPositive {
                line: self.line,
                token: self.index,
                what: format!("cost of column {} (fits in 32 bits)", j + 1),
                value: cost,
            })?;
            costs.push(cost);
        }
        let mut cols_of_row = Vec::with_capacity(num_rows);
        for i in 0..num_rows {
            let count = self.positive(|| format!("number of columns covering row {}", i + 1))?;
            let mut cols = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let value = self.next_int(|| format!("column index for row {}", i + 1))?;
                if value < 1 || value as usize > num_cols {
                    return Err(ParseError::ColumnOutOfRange {
                        line: self.line,
                        token: self.index,
                        row: i + 1,
                        value,
                        num_cols,
                    });
                }
                let col = value as usize - 1;
                if cols.contains(&col) {
                    return Err(ParseError::Invalid {
                        line: self.line,
                        source: InstanceError::DuplicateColumn { row: i, col },
                    });
                }
                cols.push(col);
            }
            cols_of_row.push(cols);
        }
        if let Some(&(line, text)) = self.tokens.get(self.index) {
            return Err(ParseError::TrailingToken { line, token: self.index + 1, text: text.to_string() });
        }
        let line = self.line;
        Instance::from_rows(costs, cols_of_row).map_err(|source| ParseError::Invalid { line, source })
    }
}

/// Parameters for [`generate_random`].
#[derive(Debug, Clone)]
pub struct RandomInstanceSpec {
    pub rows: usize,
    pub cols: usize,
    pub density: f64,
    pub costs: RangeInclusive<u32>,
    pub seed: u64,
}

impl RandomInstanceSpec {
    pub fn new(rows: usize, cols: usize, density: f64, seed: u64) -> Self {
        Self { rows, cols, density, costs: 1..=100, seed }
    }
}

/// Generates a random coverable instance.
///
/// Every cell is set independently with probability `density`; a row left
/// uncovered receives one uniformly chosen column. Costs are uniform in the
/// given range. Deterministic in the seed.
pub fn generate_random(spec: &RandomInstanceSpec) -> Result<Instance, InstanceError> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(InstanceError::EmptyDimensions { rows: spec.rows, cols: spec.cols });
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(InstanceError::InvalidDensity(spec.density));
    }
    let (lo, hi) = (*spec.costs.start(), *spec.costs.end());
    if lo == 0 || lo > hi {
        return Err(InstanceError::InvalidCostRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let all_cols: Vec<usize> = (0..spec.cols).collect();
    let mut cols_of_row = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let mut cols: Vec<usize> = (0..spec.cols).filter(|_| rng.random_bool(spec.density)).collect();
        if cols.is_empty() {
            cols.push(*all_cols.choose(&mut rng).expect("at least one column"));
        }
        cols_of_row.push(cols);
    }
    let costs = (0..spec.cols).map(|_| rng.random_range(lo..=hi)).collect();
    Instance::from_rows(costs, cols_of_row)
}

/// A set of chosen columns with per-row cover counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    chosen: Vec<usize>,
    #[serde(skip)]
    cover_count: Vec<u32>,
    #[serde(skip)]
    uncovered: usize,
    cost: u64,
}

impl Solution {
    /// The empty selection for `instance`.
    pub fn empty(instance: &Instance) -> Self {
        Self { chosen: Vec::new(), cover_count: vec![0; instance.num_rows()], uncovered: instance.num_rows(), cost: 0 }
    }

    /// Chosen columns, ascending.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn cover_count(&self) -> &[u32] {
        &self.cover_count
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// True iff every row is covered at least once.
    pub fn is_feasible(&self) -> bool {
        self.uncovered == 0
    }

    pub fn is_covered(&self, row: usize) -> bool {
        self.cover_count[row] > 0
    }

    pub fn contains(&self, col: usize) -> bool {
        self.chosen.binary_search(&col).is_ok()
    }

    /// Adds `col`, which must not already be chosen.
    pub(crate) fn add(&mut self, instance: &Instance, col: usize) {
        let pos = self.chosen.binary_search(&col).expect_err("column already chosen");
        self.chosen.insert(pos, col);
        self.cost += u64::from(instance.cost(col));
        for &row in instance.rows_of_col(col) {
            if self.cover_count[row] == 0 {
                self.uncovered -= 1;
            }
            self.cover_count[row] += 1;
        }
    }

    /// Removes `col`, which must be chosen.
    pub(crate) fn remove(&mut self, instance: &Instance, col: usize) {
        let pos = self.chosen.binary_search(&col).expect("column not chosen");
        self.chosen.remove(pos);
        self.cost -= u64::from(instance.cost(col));
        for &row in instance.rows_of_col(col) {
            self.cover_count[row] -= 1;
            if self.cover_count[row] == 0 {
                self.uncovered += 1;
            }
        }
    }

    /// True iff every row covered by `col` is covered at least twice.
    pub fn is_redundant(&self, instance: &Instance, col: usize) -> bool {
        instance.rows_of_col(col).iter().all(|&row| self.cover_count[row] >= 2)
    }
}
