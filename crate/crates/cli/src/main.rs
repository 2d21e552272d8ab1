use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mata_darp::bench::{self, TrialOptions, DEFAULT_CHECKPOINTS_S, DEFAULT_SEEDS};
use mata_darp::trace::write_trace_csv;
use mata_darp::validate::validate_routes;
use mata_darp::{
    anneal, exact_solve, parse_named_instance, parse_solution, EngineConfig, Execution, Instance,
    Termination,
};

/// Multi-atomic annealing solver for the static dial-a-ride problem.
#[derive(Parser)]
#[command(name = "mata", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with a single seed.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        params: Params,
        /// Write the convergence trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the best solution here.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Run one trial per seed and summarize checkpoint costs.
    Bench {
        instance: PathBuf,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
        seeds: Vec<u64>,
        /// Comma-separated checkpoints in seconds.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CHECKPOINTS_S)]
        checkpoints: Vec<f64>,
        #[command(flatten)]
        params: Params,
        /// Directory receiving one trace CSV per seed.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Run trials one after another.
        #[arg(long)]
        sequential: bool,
        /// Re-validate every intermediate solution.
        #[arg(long)]
        verify: bool,
    },
    /// Check a solution file against an instance.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Percentage gap of a cost to a best known cost.
    Gap { cost: f64, bks: f64 },
    /// Solve a tiny instance exactly.
    Oracle { instance: PathBuf },
}

#[derive(Args)]
struct Params {
    /// Wall-clock budget per run [default: 60000].
    #[arg(long, conflicts_with = "iterations")]
    time_limit_ms: Option<u64>,
    /// Stop after this many iterations instead of a time budget.
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    delta_max: Option<u64>,
    /// Best known cost; looked up by instance name when omitted.
    #[arg(long)]
    bks: Option<f64>,
}

impl Params {
    fn config(&self, inst: &Instance, default_ms: u64) -> Result<EngineConfig> {
        let mut config = EngineConfig::for_instance(inst);
        config.termination = match self.iterations {
            Some(k) => Termination::Iterations(k),
            None => Termination::TimeLimit(Duration::from_millis(
                self.time_limit_ms.unwrap_or(default_ms),
            )),
        };
        if let Some(t) = self.t_max {
            config.t_max = t;
            if self.t_min.is_none() {
                config.t_min = config.t_min.min(t);
            }
        }
        if let Some(t) = self.t_min {
            config.t_min = t;
        }
        if let Some(l) = self.lambda_t {
            config.lambda_t = l;
        }
        if let Some(d) = self.delta_max {
            config.delta_max = d;
        }
        config.validate()?;
        Ok(config)
    }

    fn bks(&self, inst: &Instance) -> Option<f64> {
        self.bks.or_else(|| bench::known_bks(&inst.name))
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let inst = parse_named_instance(&name, &text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(inst.tighten_time_windows()?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn solve(
    path: &Path,
    seed: u64,
    params: &Params,
    trace: Option<&Path>,
    solution: Option<&Path>,
) -> Result<ExitCode> {
    let inst = load_instance(path)?;
    let config = params.config(&inst, 60_000)?.with_seed(seed);
    let mut records = Vec::new();
    let out = anneal(&inst, &config, &mut |r| records.push(r.clone()))?;
    if let Some(p) = trace {
        write_file(p, &write_trace_csv(&records))?;
    }
    println!("instance   {}", inst.name);
    println!("iterations {}", out.iterations);
    println!("elapsed_ms {:.3}", out.elapsed.as_secs_f64() * 1000.0);
    let Some(best) = out.best else {
        println!("no feasible complete solution found");
        return Ok(ExitCode::from(2));
    };
    if let Some(p) = solution {
        write_file(p, &best.to_text(&inst))?;
    }
    println!("cost       {:.2}", best.cost());
    println!("served     {}/{}", best.served_count(), inst.n());
    if let Some(b) = params.bks(&inst) {
        println!("gap        {:.2}%", bench::gap(best.cost(), b)?);
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn run_bench(
    path: &Path,
    seeds: &[u64],
    checkpoints: &[f64],
    params: &Params,
    trace_dir: Option<&Path>,
    sequential: bool,
    verify: bool,
) -> Result<ExitCode> {
    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    let inst = load_instance(path)?;
    let default_ms = checkpoints.iter().cloned().fold(0.0, f64::max) * 1000.0;
    let config = params.config(&inst, default_ms.ceil() as u64)?;
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let options = TrialOptions {
        verify_each_step: verify,
    };
    let results = bench::run_trials(&inst, &config, seeds, &options, exec);

    let mut traces = Vec::new();
    let mut failed = Vec::new();
    let (mut checked, mut check_failures) = (0, 0);
    for (&seed, result) in seeds.iter().zip(results) {
        match result {
            Ok(trial) => {
                if let Some(dir) = trace_dir {
                    fs::create_dir_all(dir)?;
                    let file = dir.join(format!("{}_seed{seed}.csv", inst.name));
                    write_file(&file, &write_trace_csv(&trial.records))?;
                }
                checked += trial.checked;
                check_failures += trial.check_failures;
                traces.push((seed, trial.records));
            }
            Err(e) => failed.push((seed, e)),
        }
    }
    let mut summary = bench::summarize(&inst.name, &traces, checkpoints, params.bks(&inst));
    summary.failed = failed;
    print!("{}", summary.to_csv());
    println!();
    print!("{}", summary.to_table());
    if verify {
        println!("verified {checked} intermediate solutions, {check_failures} with violations");
    }
    Ok(if traces.is_empty() || check_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn run_validate(instance: &Path, solution: &Path) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    let text =
        fs::read_to_string(solution).with_context(|| format!("reading {}", solution.display()))?;
    let parsed = parse_solution(&text).with_context(|| format!("parsing {}", solution.display()))?;
    let claimed = parsed.claimed_cost;
    let mut report = validate_routes(&inst, &parsed.routes, parsed.claimed_unserved.len(), Some(claimed));
    // partition problems (a request served twice, or listed as unserved while
    // on a route) are reported alongside the route checks
    if let Err(e) = parsed.into_solution(&inst) {
        report.structural.push(e.to_string());
    }
    println!("{report}");
    Ok(if report.is_clean() && report.is_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn run_oracle(path: &Path) -> Result<ExitCode> {
    let inst = load_instance(path)?;
    let result = exact_solve(&inst)?;
    println!("explored {}", result.explored);
    match (result.optimal_cost, result.optimal_solution) {
        (Some(cost), Some(sol)) => {
            println!("optimal cost {cost:.2}");
            print!("{}", sol.to_text(&inst));
            Ok(ExitCode::SUCCESS)
        }
        _ => {
            println!("no feasible complete solution exists");
            Ok(ExitCode::from(2))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            instance,
            seed,
            params,
            trace,
            solution,
        } => solve(&instance, seed, &params, trace.as_deref(), solution.as_deref()),
        Command::Bench {
            instance,
            seeds,
            checkpoints,
            params,
            trace,
            sequential,
            verify,
        } => run_bench(
            &instance,
            &seeds,
            &checkpoints,
            &params,
            trace.as_deref(),
            sequential,
            verify,
        ),
        Command::Validate { instance, solution } => run_validate(&instance, &solution),
        Command::Gap { cost, bks } => {
            println!("{:.2}", bench::gap(cost, bks)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { instance } => run_oracle(&instance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
