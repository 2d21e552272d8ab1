//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that need the standard benchmark files (R1a, R3a, R6a, R8a) look
//! for them in `$DARP_BENCHMARK_DIR` or `data/benchmark/` at the workspace
//! root, under either name (`R1a.txt`, `pr01.txt`, with or without the
//! extension). Without the files those criteria report FAIL as not
//! evaluated; the process exits nonzero only when an evaluated criterion
//! fails.

mod support;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use mata_darp::bench::{self, known_bks, median, TrialOptions};
use mata_darp::engine::{
    build_sorted_list, burn, construct, step_temperature, Engine, Inserter, Phase,
};
use mata_darp::schedule::Scheduler;
use mata_darp::trace::write_trace_csv;
use mata_darp::validate::{grid_schedule_exists, validate};
use mata_darp::{
    anneal, exact_solve, parse_named_instance, EngineConfig, Execution, Instance, Solution,
    Termination,
};
use rand::Rng;

use support::*;

enum Verdict {
    Pass(String),
    Fail(String),
    Unevaluated(String),
}

struct Benchmark {
    name: &'static str,
    alias: &'static str,
    n: usize,
    m: usize,
    first_feasible_ms: f64,
}

const BENCHMARKS: [Benchmark; 4] = [
    Benchmark { name: "R1a", alias: "pr01", n: 24, m: 3, first_feasible_ms: 1.0 },
    Benchmark { name: "R3a", alias: "pr03", n: 72, m: 7, first_feasible_ms: 31.0 },
    Benchmark { name: "R6a", alias: "pr06", n: 144, m: 13, first_feasible_ms: 188.0 },
    Benchmark { name: "R8a", alias: "pr08", n: 72, m: 6, first_feasible_ms: 31.0 },
];

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn benchmark_dir() -> PathBuf {
    std::env::var_os("DARP_BENCHMARK_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/benchmark"))
}

fn load_benchmark(b: &Benchmark) -> Option<Instance> {
    let dir = benchmark_dir();
    let candidates = [b.name.to_string(), b.name.to_lowercase(), b.alias.to_string()];
    for stem in candidates {
        for file in [format!("{stem}.txt"), stem.clone()] {
            let path = dir.join(&file);
            if let Ok(text) = std::fs::read_to_string(&path) {
                let inst = parse_named_instance(b.name, &text)
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                return Some(inst.tighten_time_windows().expect("benchmark windows are consistent"));
            }
        }
    }
    None
}

fn stand_in(b: &Benchmark) -> Instance {
    cl_like(b.n, b.m, 7)
        .tighten_time_windows()
        .expect("generated windows are consistent")
}

#[derive(Default)]
struct FeasibilityLog {
    checked: u64,
    failures: u64,
    sources: Vec<String>,
}

impl FeasibilityLog {
    fn check(&mut self, inst: &Instance, sol: &Solution) {
        self.checked += 1;
        let report = validate(inst, sol);
        if !(report.is_clean() && report.fast_violations.is_zero()) {
            self.failures += 1;
        }
    }
}

/// Replays an iteration-for-iteration copy of a finished timed run with
/// every intermediate solution re-validated.
fn replay_verified(inst: &Instance, config: &EngineConfig, iterations: u64, log: &mut FeasibilityLog) {
    let config = config.clone().with_termination(Termination::Iterations(iterations));
    let mut engine = Engine::new(inst, config).expect("valid config");
    log.check(inst, engine.current());
    for _ in 0..iterations {
        engine.step_inspected(|_, sol| log.check(inst, sol));
    }
}

fn quality(b: &Benchmark, bound_gap: f64, log: &mut FeasibilityLog) -> Verdict {
    let Some(inst) = load_benchmark(b) else {
        return Verdict::Unevaluated(format!(
            "{} not found in {}",
            b.name,
            benchmark_dir().display()
        ));
    };
    let bks = known_bks(b.name).expect("bundled");
    let config = EngineConfig::for_instance(&inst)
        .with_termination(Termination::TimeLimit(Duration::from_secs(60)));
    let trials = bench::run_trials(&inst, &config, &SEEDS, &TrialOptions::default(), Execution::Parallel);
    let mut finals = Vec::new();
    for t in trials.into_iter().flatten() {
        finals.push(t.best.as_ref().map(Solution::cost));
        replay_verified(&inst, &config.clone().with_seed(t.seed), t.iterations, log);
    }
    log.sources.push(format!("{} x{}", b.name, finals.len()));
    let med = median(&finals);
    let detail = format!(
        "median 60 s cost {} vs bks {bks:.2}",
        med.map_or("-".into(), |c| format!("{c:.2}"))
    );
    match med.map(|c| bench::gap(c, bks).unwrap()) {
        Some(g) if finals.len() == SEEDS.len() && g <= bound_gap + 1e-9 => {
            Verdict::Pass(format!("{detail}, gap {g:.2}%"))
        }
        Some(g) => Verdict::Fail(format!("{detail}, gap {g:.2}% > {bound_gap}%")),
        None => Verdict::Fail(detail),
    }
}

fn first_feasible() -> Verdict {
    let mut missing = Vec::new();
    let mut worst = Vec::new();
    let mut failed = Vec::new();
    for b in &BENCHMARKS {
        let Some(inst) = load_benchmark(b) else {
            missing.push(b.name);
            continue;
        };
        let limit = (30.0 * b.first_feasible_ms).min(2000.0);
        let config = EngineConfig::for_instance(&inst)
            .with_termination(Termination::TimeLimit(Duration::from_secs(2)));
        let mut times = Vec::new();
        for seed in SEEDS {
            let t = bench::run_trial(&inst, &config, seed, &TrialOptions::default()).unwrap();
            let ms = bench::first_feasible(&t.records).map(|f| f.0);
            if ms.is_none_or(|ms| ms > limit) {
                failed.push(format!("{} seed {seed}: {ms:?} ms > {limit} ms", b.name));
            }
            times.push(ms.unwrap_or(f64::INFINITY));
        }
        let max = times.iter().cloned().fold(0.0, f64::max);
        worst.push(format!("{} {max:.1} ms", b.name));
    }
    if !missing.is_empty() {
        return Verdict::Unevaluated(format!(
            "{} not found in {}",
            missing.join(", "),
            benchmark_dir().display()
        ));
    }
    if failed.is_empty() {
        Verdict::Pass(format!("slowest seed: {}", worst.join(", ")))
    } else {
        Verdict::Fail(failed.join("; "))
    }
}

fn oracle_equivalence(log: &mut FeasibilityLog) -> Verdict {
    let mut r = rng(2024);
    let mut matched = 0;
    let mut misses = Vec::new();
    let started = Instant::now();
    for k in 0..20u64 {
        let n = r.random_range(1..=3);
        let m = r.random_range(1..=2);
        let inst = planted(n, m, 40_000 + k)
            .tighten_time_windows()
            .expect("planted windows are consistent");
        let optimum = exact_solve(&inst)
            .unwrap()
            .optimal_cost
            .expect("planted instance is feasible");
        let config = EngineConfig::for_instance(&inst).with_seed(k);
        let mut engine = Engine::new(&inst, config).unwrap();
        let deadline = Instant::now() + Duration::from_secs(5);
        // the best cost never rises and cannot drop below the optimum, so
        // reaching it early gives the same answer as the full budget
        let reached = |e: &Engine| e.best().is_some_and(|b| (b.cost() - optimum).abs() <= 1e-6);
        while !reached(&engine) && Instant::now() < deadline {
            engine.step_inspected(|_, sol| log.check(&inst, sol));
        }
        if reached(&engine) {
            matched += 1;
        } else {
            misses.push(format!(
                "{}: {:?} vs {optimum:.3}",
                inst.name,
                engine.best().map(Solution::cost)
            ));
        }
    }
    log.sources.push("20 oracle instances".into());
    let detail = format!(
        "{matched}/20 matched in {:.1} s",
        started.elapsed().as_secs_f64()
    );
    if matched >= 19 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {}", misses.join("; ")))
    }
}

fn stand_in_runs(log: &mut FeasibilityLog) {
    for b in &BENCHMARKS[..2] {
        let inst = stand_in(b);
        for seed in [1, 2] {
            let config = EngineConfig::for_instance(&inst)
                .with_seed(seed)
                .with_termination(Termination::TimeLimit(Duration::from_secs(3)));
            anneal_checked(&inst, &config, log);
        }
        log.sources.push(format!("{}-shaped stand-in x2", b.name));
    }
}

fn anneal_checked(inst: &Instance, config: &EngineConfig, log: &mut FeasibilityLog) {
    mata_darp::anneal_inspected(inst, config, &mut |_| {}, &mut |phase, sol| {
        if phase != Phase::Construct {
            log.check(inst, sol);
        }
    })
    .unwrap();
}

fn feasible_space(log: &FeasibilityLog) -> Verdict {
    let detail = format!(
        "{} post-burn/post-reform solutions re-validated ({}), {} with violations",
        log.checked,
        log.sources.join(", "),
        log.failures
    );
    if log.failures == 0 && log.checked > 0 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn scheduler_cross_check() -> Verdict {
    let mut r = rng(6);
    let mut scheduler = Scheduler::new();
    let (mut feasible, mut infeasible, mut mismatches) = (0, 0, Vec::new());
    for k in 0..500u64 {
        let inst = lattice(3, 60_000 + k);
        let size = r.random_range(1..=3);
        let visits = random_route(&mut r, 3, size);
        let fast = scheduler.evaluate(&inst, &visits).is_feasible();
        let grid = grid_schedule_exists(&inst, &visits, 0.1);
        if fast != grid {
            mismatches.push(format!("{} {visits:?}: eight-step {fast}, grid {grid}", inst.name));
        }
        if grid {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    let detail = format!("500 routes, {feasible} feasible, {infeasible} infeasible");
    if mismatches.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {} mismatches: {}", mismatches.len(), mismatches.join("; ")))
    }
}

fn determinism() -> Verdict {
    let (inst, label) = match load_benchmark(&BENCHMARKS[0]) {
        Some(inst) => (inst, "R1a"),
        None => (stand_in(&BENCHMARKS[0]), "R1a-shaped stand-in"),
    };
    let config = EngineConfig::for_instance(&inst)
        .with_seed(77)
        .with_termination(Termination::Iterations(5000));
    let run = || {
        let mut records = Vec::new();
        let out = anneal(&inst, &config, &mut |r| records.push(r.clone())).unwrap();
        let csv: Vec<String> = write_trace_csv(&records)
            .lines()
            .map(|l| l.split_once(',').map_or(l, |(_, rest)| rest).to_string())
            .collect();
        (csv, out.best.map(|b| b.cost().to_bits()))
    };
    let (a, b) = (run(), run());
    let detail = format!("{label}, 5000 iterations, {} trace rows", a.0.len());
    if a == b {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn unit_properties() -> Verdict {
    let mut problems = Vec::new();
    if bench::gap(190.02, 190.02) != Ok(0.0) {
        problems.push("gap(190.02, 190.02) is not exactly 0".to_string());
    }

    let mut sources = Vec::new();
    for b in &BENCHMARKS {
        let (inst, label) = match load_benchmark(b) {
            Some(inst) => (inst, b.name.to_string()),
            None => (stand_in(b), format!("{}-shaped", b.name)),
        };
        let keys = build_sorted_list(&inst).keys(&inst);
        if keys.windows(2).any(|w| w[0] > w[1]) {
            problems.push(format!("{label}: Sorted_List keys decrease"));
        }
        sources.push(label);
    }

    let mut r = rng(8);
    let config = EngineConfig {
        t_max: 36.0,
        t_min: 1e-9,
        ..EngineConfig::default()
    };
    let mut t = config.t_max;
    for k in 1..=1000 {
        let (next, reheated) = step_temperature(t, &config, &mut r);
        let expected = config.t_max * (1.0 - config.lambda_t).powi(k);
        if reheated || ((next - expected) / expected).abs() > 1e-12 {
            problems.push(format!("temperature after {k} steps is {next}, expected {expected}"));
            break;
        }
        t = next;
    }

    let inst = stand_in(&BENCHMARKS[0]);
    let sorted = build_sorted_list(&inst);
    let mut inserter = Inserter::new();
    let full = construct(&inst, &sorted, &mut inserter);
    for _ in 0..2000 {
        let temperature: f64 = r.random_range(1.0..40.0);
        let mut sol = full.clone();
        let band = burn(&inst, &mut sol, temperature, &sorted, &mut inserter, &mut r).unwrap();
        let limit = temperature.floor() as usize + 1;
        if band.size() < 1 || band.size() > limit || band.removed > band.size() {
            problems.push(format!("band of size {} at T = {temperature}", band.size()));
            break;
        }
    }

    let detail = format!("Sorted_List checked on {}", sources.join(", "));
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {}", problems.join("; ")))
    }
}

fn main() {
    let mut log = FeasibilityLog::default();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    results.push(("1 R1a quality (gap <= 2% at 60 s)", quality(&BENCHMARKS[0], 2.0, &mut log)));
    results.push(("2 R3a quality (gap <= 10% at 60 s)", quality(&BENCHMARKS[1], 10.0, &mut log)));
    results.push(("3 time to first feasible", first_feasible()));
    results.push(("4 oracle equivalence", oracle_equivalence(&mut log)));
    stand_in_runs(&mut log);
    results.push(("5 feasible-space invariant", feasible_space(&log)));
    results.push(("6 scheduler cross-check", scheduler_cross_check()));
    results.push(("7 determinism", determinism()));
    results.push(("8 unit properties", unit_properties()));

    let mut failed = 0;
    let mut unevaluated = 0;
    for (name, verdict) in &results {
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d.clone()),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d.clone())
            }
            Verdict::Unevaluated(d) => {
                unevaluated += 1;
                ("FAIL", format!("not evaluated: {d}"))
            }
        };
        println!("criterion {name:<38} {tag}  {detail}");
    }
    println!(
        "{} passed, {failed} failed, {unevaluated} not evaluated",
        results.len() - failed - unevaluated
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
