use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cover_evolve::bench::{
    brute_force_optimum, known_optimum, problem_set, run_bench, summarize, BenchReport, BenchSpec,
};
use cover_evolve::evolution::run_with;
use cover_evolve::genome::Weights;
use cover_evolve::{
    generate_random, CostRankTable, CrossoverKind, GaConfig, Instance, RandomInstanceSpec, Variant, WeightRange,
};
use serde_json::json;

const THREADS_ENV: &str = "COVER_EVOLVE_THREADS";

#[derive(Parser)]
#[command(name = "cover-evolve", version, about = "Indirect genetic algorithm for set covering problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA once and print the result as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        ga: GaArgs,
        /// Also write the JSON result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Log one line per generation to stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Run seeded repetitions on one or more instances and report deviations.
    Bench {
        /// Instance file; repeat the flag to bench several instances.
        #[arg(long, required = true)]
        instance: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Seed of the first run; run k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Known optimum (single instance only); defaults to the bundled OR-Library table.
        #[arg(long)]
        optimum: Option<u64>,
        #[command(flatten)]
        ga: GaArgs,
        /// Write the JSON report (an array when several instances are given).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append one summary row per instance to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a random instance in OR-Library format.
    Gen {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        cost_min: u32,
        #[arg(long, default_value_t = 100)]
        cost_max: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact optimum of a small instance (at most 22 columns).
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Args)]
struct GaArgs {
    /// Decoder variant: basic, newcost, 4criteria or iga.
    #[arg(long, default_value = "iga")]
    variant: Variant,
    /// Population size.
    #[arg(long, default_value_t = 200)]
    population: usize,
    /// Fraction of the best individuals kept each generation.
    #[arg(long, default_value_t = 0.2)]
    elite_fraction: f64,
    /// Swap mutation probability (also the weight and crossover gene reset rate).
    #[arg(long, default_value_t = 0.015)]
    mutation_rate: f64,
    /// PUX probability of keeping a gene from the first parent.
    #[arg(long, default_value_t = 0.66)]
    pux_bias: f64,
    /// Stop after this many generations without improvement.
    #[arg(long, default_value_t = 50)]
    stall_limit: usize,
    /// Hard cap on the number of generations.
    #[arg(long, default_value_t = 10_000)]
    max_generations: usize,
    /// Upper bound of the weight initialisation range [0, max].
    #[arg(long, default_value_t = 100.0)]
    weight_max: f64,
    /// Freeze all weights, e.g. 10,30,15,0 (w1..w4).
    #[arg(long, value_parser = parse_weights)]
    fixed_weights: Option<Weights>,
    /// Force one crossover: 1point, pux or pmx.
    #[arg(long)]
    fixed_crossover: Option<CrossoverKind>,
}

impl GaArgs {
    fn config(&self, seed: u64) -> Result<GaConfig, CliError> {
        let weight_range = WeightRange::new(0.0, self.weight_max)
            .ok_or_else(|| CliError::Usage(format!("invalid --weight-max {}", self.weight_max)))?;
        let config = GaConfig {
            population_size: self.population,
            elite_fraction: self.elite_fraction,
            mutation_rate: self.mutation_rate,
            pux_bias: self.pux_bias,
            stall_limit: self.stall_limit,
            max_generations: self.max_generations,
            variant: self.variant,
            weight_range,
            fixed_weights: self.fixed_weights,
            fixed_crossover: self.fixed_crossover,
            seed,
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

fn parse_weights(s: &str) -> Result<Weights, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected four comma-separated weights, got `{s}`"));
    }
    let mut weights = [0.0; 4];
    for (w, p) in weights.iter_mut().zip(parts) {
        *w = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(weights)
}

enum CliError {
    Usage(String),
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Input(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Instance::parse_orlib(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve { instance, seed, ga, out, verbose } => {
            let config = ga.config(seed)?;
            let inst = load(&instance)?;
            let table = CostRankTable::new(&inst);
            let result = run_with(&inst, &config, &table, |g| {
                if verbose {
                    let [one, pux, pmx] = g.crossover_usage;
                    eprintln!(
                        "gen {:>5}  best {:>8}  pop-best {:>8}  mean {:>10.2}  stall {:>3}  1pt/pux/pmx {one}/{pux}/{pmx}",
                        g.generation, g.best_cost, g.population_best, g.mean_cost, g.stall
                    );
                }
            })
            .map_err(|e| CliError::Usage(e.to_string()))?;
            let value = json!({
                "instance": instance.display().to_string(),
                "variant": config.variant,
                "seed": seed,
                "best_cost": result.best_cost,
                "feasible": result.best_solution.is_feasible(),
                "generations": result.generations,
                "evaluations": result.evaluations,
                "elapsed_ms": result.elapsed.as_secs_f64() * 1e3,
                "chosen_columns": result.best_solution.chosen().iter().map(|c| c + 1).collect::<Vec<_>>(),
                "best_genome": {
                    "weights": result.best_genome.weights,
                    "crossover": result.best_genome.crossover,
                },
                "crossover_usage": result.crossover_usage().collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&value).expect("JSON value serialises") + "\n";
            if let Some(path) = &out {
                write_output(Some(path), &text)?;
            }
            write_output(None, &text)
        }
        Command::Bench { instance, runs, seed, optimum, ga, out, csv } => {
            if optimum.is_some() && instance.len() > 1 {
                return Err(CliError::Usage("--optimum applies to a single --instance".into()));
            }
            if runs == 0 {
                return Err(CliError::Usage("--runs must be at least 1".into()));
            }
            let config = ga.config(seed)?;
            let threads = thread_cap()?;
            let mut reports: Vec<BenchReport> = Vec::new();
            for path in &instance {
                let spec = BenchSpec {
                    known_optimum: optimum,
                    runs,
                    base_seed: seed,
                    threads,
                    csv_out: csv.clone(),
                    ..BenchSpec::new(path, config.clone())
                };
                let report = run_bench(&spec).map_err(|e| CliError::Input(e.to_string()))?;
                let dev = report.deviation_pct.map(|d| format!("{d:.2}%")).unwrap_or_else(|| "-".into());
                eprintln!(
                    "{}: best {} (optimum {}, deviation {dev}), mean {:.1} ms",
                    report.instance,
                    report.best_cost,
                    report.optimum.or_else(|| known_optimum(&report.instance)).map_or("-".into(), |o| o.to_string()),
                    report.mean_elapsed_ms
                );
                reports.push(report);
            }
            let text = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                if let Some(summary) = summarize(&reports, problem_set) {
                    eprint!("{}", summary.to_table());
                }
                serde_json::to_string_pretty(&reports)
            }
            .expect("reports serialise")
                + "\n";
            if let Some(path) = &out {
                write_output(Some(path), &text)?;
            }
            write_output(None, &text)
        }
        Command::Gen { rows, cols, density, cost_min, cost_max, seed, out } => {
            let spec = RandomInstanceSpec { rows, cols, density, costs: cost_min..=cost_max, seed };
            let inst = generate_random(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
            write_output(out.as_deref(), &inst.to_orlib())
        }
        Command::Oracle { instance } => {
            let inst = load(&instance)?;
            let (cost, chosen) = brute_force_optimum(&inst).map_err(|e| CliError::Input(e.to_string()))?;
            let value = json!({
                "instance": instance.display().to_string(),
                "cost": cost,
                "chosen_columns": chosen.iter().map(|c| c + 1).collect::<Vec<_>>(),
            });
            write_output(None, &(serde_json::to_string_pretty(&value).expect("JSON value serialises") + "\n"))
        }
    }
}
