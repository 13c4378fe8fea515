//! Acceptance criteria, one test per criterion.
//!
//! Run with `cargo test -p cover-evolve --test acceptance -- --nocapture` to
//! see one PASS/FAIL line per criterion. Criteria that need the OR-Library
//! instance files are `#[ignore]`d; point `COVER_EVOLVE_ORLIB_DIR` at a
//! directory holding `scp41.txt` .. `scpnrh5.txt` and add `--ignored`.

use std::path::PathBuf;

use cover_evolve::bench::{
    bench_instance, brute_force_optimum, known_instances, orlib_file_name, problem_set, BenchReport,
};
use cover_evolve::crossover::{crossover, one_point, pmx, pux};
use cover_evolve::decoder::{mean_rank, score, ScoreTerms};
use cover_evolve::genome::is_permutation;
use cover_evolve::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: u32, passed: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn orlib_dir() -> PathBuf {
    std::env::var_os("COVER_EVOLVE_ORLIB_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/orlib"))
}

fn load_orlib(name: &str) -> Instance {
    let path = orlib_dir().join(orlib_file_name(name));
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("OR-Library instance {name} not available at {}: {e}", path.display()));
    Instance::parse_orlib(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn small_sets() -> Vec<(&'static str, u64)> {
    known_instances().filter(|(n, _)| ["4", "5", "6"].contains(&problem_set(n).as_str())).collect()
}

fn bench_small_sets(variant: Variant) -> Vec<BenchReport> {
    small_sets()
        .into_iter()
        .map(|(name, opt)| {
            let inst = load_orlib(name);
            let report = bench_instance(&inst, name, Some(opt), &GaConfig::with_variant(variant), 10, 0, None).unwrap();
            println!(
                "  {variant} {name}: best {} / optimum {opt} ({:.2}%), mean {:.0} ms",
                report.best_cost,
                report.deviation_pct.unwrap(),
                report.mean_elapsed_ms
            );
            report
        })
        .collect()
}

fn mean_deviation(reports: &[BenchReport]) -> f64 {
    reports.iter().map(|r| r.deviation_pct.unwrap()).sum::<f64>() / reports.len() as f64
}

#[test]
fn criterion_1_worked_examples() {
    let terms = ScoreTerms { c1: 5.0, c1a: 0.0, c1b: 0.0, c2: 3.0, c3: 3.0, c4a: 0.0 };
    let s = score(&terms, &[10.0, 30.0, 15.0, 0.0], Variant::Basic);
    let r = mean_rank(&[3, 5, 3, 1, 2]);
    verdict(1, s == 85.0 && r == 2.8, &format!("basic score {s}, mean cost rank {r}"));
}

#[test]
#[ignore = "needs OR-Library sets 4-6 in COVER_EVOLVE_ORLIB_DIR; runs 250 GA runs"]
fn criterion_2_small_set_reproduction() {
    let reports = bench_small_sets(Variant::Iga);
    let hits = reports.iter().filter(|r| r.deviation_pct == Some(0.0)).count();
    let mut worst_set = 0.0f64;
    for set in ["4", "5", "6"] {
        let in_set: Vec<_> = reports.iter().filter(|r| problem_set(&r.instance) == set).cloned().collect();
        let dev = mean_deviation(&in_set);
        println!("  set {set}: mean deviation {dev:.3}%");
        worst_set = worst_set.max(dev);
    }
    verdict(
        2,
        hits >= 20 && worst_set <= 0.5,
        &format!("{hits}/25 optima matched (need 20), worst set mean deviation {worst_set:.3}% (limit 0.5%)"),
    );
}

#[test]
#[ignore = "needs OR-Library sets 4-6 in COVER_EVOLVE_ORLIB_DIR; runs 750 GA runs"]
fn criterion_3_variant_ordering() {
    let basic = mean_deviation(&bench_small_sets(Variant::Basic));
    let new_cost = mean_deviation(&bench_small_sets(Variant::NewCost));
    let four = mean_deviation(&bench_small_sets(Variant::FourCriteria));
    let slack = 0.3;
    verdict(
        3,
        basic + slack >= new_cost && new_cost + slack >= four,
        &format!("mean deviation basic {basic:.3}%, new cost {new_cost:.3}%, 4 criteria {four:.3}% (slack {slack}%)"),
    );
}

#[test]
fn criterion_4_oracle_equivalence() {
    let mut hits = 0;
    let mut oracle_beaten = false;
    for seed in 0..100u64 {
        let inst = generate_random(&RandomInstanceSpec::new(8, 12, 0.3, seed)).unwrap();
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        let result = run(&inst, &GaConfig { seed, ..GaConfig::default() }).unwrap();
        hits += usize::from(result.best_cost == opt);
        oracle_beaten |= result.best_cost < opt;

        let table = CostRankTable::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let g = Genome::random(8, WeightRange::default(), &mut rng);
            for v in Variant::ALL {
                oracle_beaten |= fitness(&inst, &g, v, &table).cost() < opt;
            }
        }
    }
    verdict(
        4,
        hits >= 95 && !oracle_beaten,
        &format!("IGA found the optimum on {hits}/100 instances (need 95); oracle beaten: {oracle_beaten}"),
    );
}

/// Every property checked on one random instance; returns the first violation.
fn check_properties(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = 2 + (seed as usize % 14);
    let cols = 3 + (seed as usize * 7 % 25);
    let density = [0.05, 0.15, 0.3, 0.6][seed as usize % 4];
    let inst = generate_random(&RandomInstanceSpec::new(rows, cols, density, seed)).map_err(|e| e.to_string())?;
    let table = CostRankTable::new(&inst);
    let ensure = |ok: bool, what: &str| if ok { Ok(()) } else { Err(format!("seed {seed}: {what}")) };

    for _ in 0..8 {
        let g = Genome::random(rows, WeightRange::default(), &mut rng);
        for v in Variant::ALL {
            let sol = decode(&inst, &g, v, &table);
            ensure(sol.is_feasible(), "decoder feasibility")?;
            ensure(sol == decode(&inst, &g, v, &table), "decoder determinism")?;
            let mut scaled = g.clone();
            scaled.weights = g.weights.map(|w| w * 4.0);
            ensure(sol == decode(&inst, &scaled, v, &table), "weight scaling invariance")?;

            let climbed = remove_redundant(&inst, sol.clone());
            ensure(climbed.is_feasible(), "hill-climber feasibility")?;
            ensure(climbed.cost() <= sol.cost(), "hill-climber monotonicity")?;
            ensure(climbed.chosen().iter().all(|c| sol.contains(*c)), "hill-climber subset")?;
            let again = remove_redundant(&inst, climbed.clone());
            ensure(again == climbed, "hill-climber irredundancy / idempotence")?;
        }

        let other = Genome::random(rows, WeightRange::default(), &mut rng);
        let pairs = [
            one_point(&g.perm, &other.perm, &mut rng),
            pmx(&g.perm, &other.perm, &mut rng),
            pux(&g.perm, &other.perm, 0.66, &mut rng),
        ];
        for (c1, c2) in pairs {
            ensure(is_permutation(&c1) && is_permutation(&c2), "crossover permutation")?;
            ensure(c1.len() == rows && c2.len() == rows, "crossover length")?;
        }
        for kind in CrossoverKind::ALL {
            let (c1, _) = crossover(kind, &g.perm, &other.perm, 0.66, &mut rng);
            ensure(is_permutation(&c1), "dispatch permutation")?;
        }
        let mut mutant = g.clone();
        mutant.swap_mutate(1.0, &mut rng);
        mutant.mutate_auxiliary(0.5, WeightRange::default(), &mut rng);
        ensure(mutant.is_permutation(), "mutation permutation")?;
    }

    let stall_limit = 1 + (seed as usize % 6);
    let config =
        GaConfig { population_size: 12, stall_limit, seed, ..GaConfig::with_variant(Variant::ALL[seed as usize % 4]) };
    let result = run(&inst, &config).map_err(|e| e.to_string())?;
    let mut prev = u64::MAX;
    for g in &result.history {
        ensure(g.best_cost <= prev && g.population_best == g.best_cost, "elitism")?;
        prev = g.best_cost;
    }
    ensure(result.history.last().map(|g| g.stall) == Some(stall_limit), "stall-rule termination")?;
    ensure(result.generations < config.max_generations, "run terminated by stall rule")
}

#[test]
fn criterion_5_property_suite() {
    let cases = 400;
    let failures: Vec<String> = (0..cases).filter_map(|s| check_properties(s).err()).collect();
    verdict(
        5,
        failures.is_empty(),
        &format!("{} of {cases} randomized instances violated a property {:?}", failures.len(), failures.first()),
    );
}

#[test]
fn criterion_6_round_trip_on_generated_instances() {
    let mut ok = true;
    let mut shape = String::new();
    for (seed, (rows, cols, density)) in
        [(200, 1000, 0.02), (200, 2000, 0.02), (200, 1000, 0.05), (300, 3000, 0.02)].into_iter().enumerate()
    {
        let inst = generate_random(&RandomInstanceSpec::new(rows, cols, density, seed as u64)).unwrap();
        let parsed = Instance::parse_orlib(&inst.to_orlib()).unwrap();
        ok &= parsed == inst && Instance::parse_orlib(&parsed.to_orlib()).unwrap() == parsed;
        if seed == 0 {
            shape = format!("{}x{} at {:.2}% density", parsed.num_rows(), parsed.num_cols(), 100.0 * parsed.density());
            ok &= parsed.num_rows() == 200 && parsed.num_cols() == 1000;
        }
    }
    verdict(6, ok, &format!("generated OR-Library-shaped instances round-trip; first is {shape}"));
}

#[test]
#[ignore = "needs all 65 OR-Library SCP files in COVER_EVOLVE_ORLIB_DIR"]
fn criterion_6_round_trip_on_orlib_files() {
    let mut failures = Vec::new();
    for (name, _) in known_instances() {
        let inst = load_orlib(name);
        if Instance::parse_orlib(&inst.to_orlib()).ok().as_ref() != Some(&inst) {
            failures.push(name);
        }
    }
    let scp41 = load_orlib("4.1");
    let density = 100.0 * scp41.density();
    verdict(
        6,
        failures.is_empty() && scp41.num_rows() == 200 && scp41.num_cols() == 1000,
        &format!(
            "round-trip failures {failures:?}; scp41 is {}x{} at {density:.2}% density",
            scp41.num_rows(),
            scp41.num_cols()
        ),
    );
}

#[test]
#[ignore = "needs OR-Library sets G and H in COVER_EVOLVE_ORLIB_DIR; smoke test, no threshold"]
fn large_sets_smoke() {
    for (name, opt) in known_instances().filter(|(n, _)| n.starts_with('G') || n.starts_with('H')) {
        let inst = load_orlib(name);
        let result = run(&inst, &GaConfig::default()).unwrap();
        assert!(result.best_solution.is_feasible());
        println!(
            "  {name}: best {} / optimum {opt} ({:.2}%), {} generations, {:.1} s",
            result.best_cost,
            100.0 * (result.best_cost as f64 - opt as f64) / opt as f64,
            result.generations,
            result.elapsed.as_secs_f64()
        );
    }
}
