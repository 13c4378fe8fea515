//! Benchmark protocol: seeded repeated runs, deviation from known optima,
//! JSON and CSV reports, per-set summaries, and an exact oracle for tiny
//! instances.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::decoder::{CostRankTable, Variant};
use crate::evolution::{run_with, ConfigError, GaConfig, RunResult};
use crate::instance::{Instance, ParseError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("CSV error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("at least one run is required")]
    NoRuns,
    #[error("cannot build thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exhaustive search is limited to {max} columns, instance has {found}")]
    TooManyColumns { max: usize, found: usize },
    #[error("instance has no feasible cover")]
    Infeasible,
}

/// Optimal costs of the OR-Library SCP sets 4, 5, 6 and A to H.
const KNOWN_OPTIMA: [(&str, u64); 65] = [
    ("4.1", 429),
    ("4.2", 512),
    ("4.3", 516),
    ("4.4", 494),
    ("4.5", 512),
    ("4.6", 560),
    ("4.7", 430),
    ("4.8", 492),
    ("4.9", 641),
    ("4.10", 514),
    ("5.1", 253),
    ("5.2", 302),
    ("5.3", 226),
    ("5.4", 242),
    ("5.5", 211),
    ("5.6", 213),
    ("5.7", 293),
    ("5.8", 288),
    ("5.9", 279),
    ("5.10", 265),
    ("6.1", 138),
    ("6.2", 146),
    ("6.3", 145),
    ("6.4", 131),
    ("6.5", 161),
    ("A.1", 253),
    ("A.2", 252),
    ("A.3", 232),
    ("A.4", 234),
    ("A.5", 236),
    ("B.1", 69),
    ("B.2", 76),
    ("B.3", 80),
    ("B.4", 79),
    ("B.5", 72),
    ("C.1", 227),
    ("C.2", 219),
    ("C.3", 243),
    ("C.4", 219),
    ("C.5", 215),
    ("D.1", 60),
    ("D.2", 66),
    ("D.3", 72),
    ("D.4", 62),
    ("D.5", 61),
    ("E.1", 29),
    ("E.2", 30),
    ("E.3", 27),
    ("E.4", 28),
    ("E.5", 28),
    ("F.1", 14),
    ("F.2", 15),
    ("F.3", 14),
    ("F.4", 14),
    ("F.5", 13),
    ("G.1", 176),
    ("G.2", 154),
    ("G.3", 166),
    ("G.4", 168),
    ("G.5", 168),
    ("H.1", 63),
    ("H.2", 63),
    ("H.3", 59),
    ("H.4", 58),
    ("H.5", 55),
];

/// Sets whose OR-Library files carry an `nr` prefix (`scpnre1.txt`). The
/// unprefixed `scpe1.txt` is a different, small unicost instance.
const NR_SETS: [&str; 4] = ["e", "f", "g", "h"];

/// Canonical `set.index` name (e.g. `4.1`, `A.3`, `E.2`) for an OR-Library
/// instance identifier such as `scp41`, `scp410.txt`, `scpa3`, `scpnre2`, or `4.1`.
pub fn canonical_name(id: &str) -> Option<String> {
    let base = id.rsplit(['/', '\\']).next()?;
    let base = base.strip_suffix(".txt").unwrap_or(base).to_ascii_lowercase();
    let body = base.strip_prefix("scp").unwrap_or(&base);
    let (set, index) = match body.split_once('.') {
        Some(parts) => parts,
        None => {
            let (nr, rest) = match body.strip_prefix("nr") {
                Some(rest) => (true, rest),
                None => (false, body),
            };
            let (set, index) = rest.split_at(rest.chars().next()?.len_utf8());
            if nr != NR_SETS.contains(&set) {
                return None;
            }
            (set, index)
        }
    };
    if set.len() != 1 || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let name = format!("{}.{}", set.to_ascii_uppercase(), index.parse::<u32>().ok()?);
    KNOWN_OPTIMA.iter().any(|(n, _)| *n == name).then_some(name)
}

/// Known optimum of a bundled OR-Library instance.
pub fn known_optimum(id: &str) -> Option<u64> {
    let name = canonical_name(id)?;
    KNOWN_OPTIMA.iter().find(|(n, _)| *n == name).map(|&(_, c)| c)
}

/// Names of all instances with a bundled optimum, in table order.
pub fn known_instances() -> impl Iterator<Item = (&'static str, u64)> {
    KNOWN_OPTIMA.iter().copied()
}

/// OR-Library file name (`scp41.txt`, `scpa1.txt`, `scpnre1.txt`) for a
/// canonical name.
pub fn orlib_file_name(name: &str) -> String {
    let (set, index) = name.split_once('.').unwrap_or((name, ""));
    let set = set.to_ascii_lowercase();
    let nr = if NR_SETS.contains(&set.as_str()) { "nr" } else { "" };
    format!("scp{nr}{set}{index}.txt")
}

/// Problem set of an instance id: `4` for `scp41`, `A` for `A.1`.
pub fn problem_set(id: &str) -> String {
    canonical_name(id).and_then(|n| n.split_once('.').map(|(s, _)| s.to_string())).unwrap_or_else(|| id.to_string())
}

pub fn deviation_pct(cost: u64, optimum: u64) -> f64 {
    100.0 * (cost as f64 - optimum as f64) / optimum as f64
}

/// Largest column count accepted by [`brute_force_optimum`].
pub const ORACLE_MAX_COLUMNS: usize = 22;

/// Exact minimum-cost cover by exhaustive search with cost pruning.
///
/// Among optimal covers, the lexicographically smallest column list is
/// returned.
pub fn brute_force_optimum(instance: &Instance) -> Result<(u64, Vec<usize>), OracleError> {
    let n = instance.num_cols();
    if n > ORACLE_MAX_COLUMNS {
        return Err(OracleError::TooManyColumns { max: ORACLE_MAX_COLUMNS, found: n });
    }
    // last_cover[row]: highest column index covering the row, for the
    // "can this row still be covered" prune.
    let last_cover: Vec<usize> =
        (0..instance.num_rows()).map(|r| *instance.cols_of_row(r).last().expect("rows are coverable")).collect();
    let mut search = Oracle {
        instance,
        last_cover,
        counts: vec![0; instance.num_rows()],
        uncovered: instance.num_rows(),
        chosen: Vec::new(),
        best: None,
    };
    search.branch(0, 0);
    search.best.ok_or(OracleError::Infeasible)
}

struct Oracle<'a> {
    instance: &'a Instance,
    last_cover: Vec<usize>,
    counts: Vec<u32>,
    uncovered: usize,
    chosen: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
}

impl Oracle<'_> {
    fn branch(&mut self, col: usize, cost: u64) {
        if let Some((best, _)) = &self.best {
            if cost > *best {
                return;
            }
        }
        if self.uncovered == 0 {
            let better = match &self.best {
                None => true,
                Some((c, set)) => cost < *c || (cost == *c && self.chosen < *set),
            };
            if better {
                self.best = Some((cost, self.chosen.clone()));
            }
            // costs are positive, so no superset can do better
            return;
        }
        if col == self.instance.num_cols() {
            return;
        }
        if (0..self.counts.len()).any(|r| self.counts[r] == 0 && self.last_cover[r] < col) {
            return;
        }
        self.toggle(col, true);
        self.branch(col + 1, cost + u64::from(self.instance.cost(col)));
        self.toggle(col, false);
        self.branch(col + 1, cost);
    }

    fn toggle(&mut self, col: usize, on: bool) {
        for &row in self.instance.rows_of_col(col) {
            if on {
                if self.counts[row] == 0 {
                    self.uncovered -= 1;
                }
                self.counts[row] += 1;
            } else {
                self.counts[row] -= 1;
                if self.counts[row] == 0 {
                    self.uncovered += 1;
                }
            }
        }
        if on {
            self.chosen.push(col);
        } else {
            self.chosen.pop();
        }
    }
}

/// One benchmark: several seeded runs of one configuration on one instance.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub instance_path: PathBuf,
    /// Identifier used in reports; defaults to the file stem.
    pub instance_id: Option<String>,
    /// Overrides the bundled optimum table.
    pub known_optimum: Option<u64>,
    pub runs: usize,
    pub base_seed: u64,
    pub config: GaConfig,
    /// Thread cap for concurrent runs; `None` uses every core.
    pub threads: Option<usize>,
    pub json_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
}

impl BenchSpec {
    pub fn new(instance_path: impl Into<PathBuf>, config: GaConfig) -> Self {
        Self {
            instance_path: instance_path.into(),
            instance_id: None,
            known_optimum: None,
            runs: 10,
            base_seed: 0,
            config,
            threads: None,
            json_out: None,
            csv_out: None,
        }
    }

    fn id(&self) -> String {
        self.instance_id.clone().unwrap_or_else(|| {
            self.instance_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.instance_path.display().to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub best_cost: u64,
    pub generations: usize,
    pub evaluations: usize,
    pub elapsed_ms: f64,
    /// 1-based, as in the OR-Library files.
    pub chosen_columns: Vec<usize>,
}

impl RunSummary {
    fn from_result(seed: u64, r: &RunResult) -> Self {
        Self {
            seed,
            best_cost: r.best_cost,
            generations: r.generations,
            evaluations: r.evaluations,
            elapsed_ms: millis(r.elapsed),
            chosen_columns: r.best_solution.chosen().iter().map(|c| c + 1).collect(),
        }
    }
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub instance: String,
    pub variant: Variant,
    pub runs: Vec<RunSummary>,
    pub best_cost: u64,
    pub optimum: Option<u64>,
    pub deviation_pct: Option<f64>,
    pub mean_elapsed_ms: f64,
    pub timing: &'static str,
}

impl BenchReport {
    pub fn from_runs(instance: String, variant: Variant, optimum: Option<u64>, runs: Vec<RunSummary>) -> Self {
        let best_cost = runs.iter().map(|r| r.best_cost).min().expect("at least one run");
        let mean_elapsed_ms = runs.iter().map(|r| r.elapsed_ms).sum::<f64>() / runs.len() as f64;
        Self {
            instance,
            variant,
            best_cost,
            optimum,
            deviation_pct: optimum.map(|o| deviation_pct(best_cost, o)),
            mean_elapsed_ms,
            runs,
            timing: "wall-clock, not hardware-normalised",
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<(), BenchError> {
        let text = serde_json::to_string_pretty(self).expect("report serialises");
        fs::write(path, text + "\n").map_err(|source| BenchError::Write { path: path.into(), source })
    }

    /// Appends a summary row, writing the header first if the file is new or empty.
    pub fn append_csv(&self, path: &Path) -> Result<(), BenchError> {
        let csv_err = |source| BenchError::Csv { path: path.into(), source };
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| BenchError::Write { path: path.into(), source })?;
        let mut w = csv::Writer::from_writer(file);
        if fresh {
            w.write_record(CSV_HEADER).map_err(csv_err)?;
        }
        w.write_record(self.csv_record()).map_err(csv_err)?;
        w.flush().map_err(|source| BenchError::Write { path: path.into(), source })
    }

    pub fn csv_record(&self) -> [String; 6] {
        [
            self.instance.clone(),
            self.variant.to_string(),
            self.best_cost.to_string(),
            self.optimum.map(|o| o.to_string()).unwrap_or_default(),
            self.deviation_pct.map(|d| format!("{d:.4}")).unwrap_or_default(),
            format!("{:.3}", self.mean_elapsed_ms),
        ]
    }
}

pub const CSV_HEADER: [&str; 6] = ["instance", "variant", "best_cost", "optimum", "deviation_pct", "mean_elapsed_ms"];

/// Runs `runs` seeded GA runs (seeds `base_seed + k`) on an in-memory instance.
pub fn bench_instance(
    instance: &Instance,
    id: &str,
    optimum: Option<u64>,
    config: &GaConfig,
    runs: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<BenchReport, BenchError> {
    if runs == 0 {
        return Err(BenchError::NoRuns);
    }
    config.validate()?;
    let table = CostRankTable::new(instance);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let summaries = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|k| {
                let seed = base_seed + k as u64;
                let cfg = GaConfig { seed, ..config.clone() };
                run_with(instance, &cfg, &table, |_| {}).map(|r| RunSummary::from_result(seed, &r))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(BenchReport::from_runs(id.to_string(), config.variant, optimum, summaries))
}

/// Loads the instance named by `spec`, runs it, and writes the requested reports.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport, BenchError> {
    let path = &spec.instance_path;
    let text = fs::read_to_string(path).map_err(|source| BenchError::Read { path: path.clone(), source })?;
    let instance = Instance::parse_orlib(&text).map_err(|source| BenchError::Parse { path: path.clone(), source })?;
    let id = spec.id();
    let optimum = spec.known_optimum.or_else(|| known_optimum(&id));
    let report = bench_instance(&instance, &id, optimum, &spec.config, spec.runs, spec.base_seed, spec.threads)?;
    if let Some(out) = &spec.json_out {
        report.write_json(out)?;
    }
    if let Some(csv) = &spec.csv_out {
        report.append_csv(csv)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub group: String,
    pub instances: usize,
    /// Mean deviation over the instances that have a known optimum.
    pub mean_deviation_pct: Option<f64>,
    pub mean_elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub groups: Vec<GroupRow>,
    /// Mean of the per-group means.
    pub overall_by_group: GroupRow,
    /// Mean over all instances.
    pub overall_by_instance: GroupRow,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-problem-set means of deviation and run time, plus two overall rows.
///
/// `group_of` maps an instance id to its group, typically [`problem_set`].
pub fn summarize(reports: &[BenchReport], group_of: impl Fn(&str) -> String) -> Option<Summary> {
    if reports.is_empty() {
        return None;
    }
    let mut grouped: BTreeMap<String, Vec<&BenchReport>> = BTreeMap::new();
    for r in reports {
        grouped.entry(group_of(&r.instance)).or_default().push(r);
    }
    let groups: Vec<GroupRow> = grouped
        .into_iter()
        .map(|(group, rs)| GroupRow {
            group,
            instances: rs.len(),
            mean_deviation_pct: mean(rs.iter().filter_map(|r| r.deviation_pct)),
            mean_elapsed_ms: mean(rs.iter().map(|r| r.mean_elapsed_ms)).expect("group is not empty"),
        })
        .collect();
    let overall_by_group = GroupRow {
        group: "Overall (mean of sets)".into(),
        instances: reports.len(),
        mean_deviation_pct: mean(groups.iter().filter_map(|g| g.mean_deviation_pct)),
        mean_elapsed_ms: mean(groups.iter().map(|g| g.mean_elapsed_ms)).expect("non-empty"),
    };
    let overall_by_instance = GroupRow {
        group: "Overall (mean of instances)".into(),
        instances: reports.len(),
        mean_deviation_pct: mean(reports.iter().filter_map(|r| r.deviation_pct)),
        mean_elapsed_ms: mean(reports.iter().map(|r| r.mean_elapsed_ms)).expect("non-empty"),
    };
    Some(Summary { groups, overall_by_group, overall_by_instance })
}

impl Summary {
    /// Plain-text table, one line per set and two overall lines.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<28} {:>9} {:>10} {:>14}\n", "set", "instances", "dev %", "mean ms");
        for row in self.groups.iter().chain([&self.overall_by_group, &self.overall_by_instance]) {
            let dev = row.mean_deviation_pct.map(|d| format!("{d:.2}%")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<28} {:>9} {:>10} {:>14.1}\n",
                row.group, row.instances, dev, row.mean_elapsed_ms
            ));
        }
        out
    }
}
