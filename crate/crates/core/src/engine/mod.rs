//! Multi-atomic annealing (MATA).
//!
//! Each iteration burns a temperature-sized band of the Sorted_List out of
//! the current solution, reforms it by re-inserting every request in random
//! order, keeps the result as the new best if it is feasible, complete and
//! strictly cheaper, and restarts from the best after `delta_max`
//! non-improving iterations. The temperature decays geometrically and is
//! redrawn uniformly from `[t_min, t_max]` once it falls below `t_min`.
//!
//! All randomness comes from one seeded ChaCha8 stream, consumed per
//! iteration in this order: burn radius, burn start, reform shuffle, reheat
//! draw (only when reheating).

mod insertion;
mod operators;
mod sequence;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use insertion::{InsertionError, Inserter, Placement};
pub use operators::{
    burn, burn_band, burn_radius_limit, construct, reform, step_temperature, BurnBand,
};
pub use sequence::{build_random_list, build_sorted_list, RandomList, SortedList};

use crate::instance::Instance;
use crate::solution::Solution;
use crate::trace::{TraceEvent, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TimeLimit(Duration),
    Iterations(u64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("temperatures must satisfy 0 < t_min <= t_max, got t_min={t_min} t_max={t_max}")]
    Temperatures { t_min: f64, t_max: f64 },
    #[error("lambda_t must lie in (0, 1), got {0}")]
    DecayRate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub t_max: f64,
    pub t_min: f64,
    pub lambda_t: f64,
    pub delta_max: u64,
    pub termination: Termination,
    pub rng_seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            t_min: 1.0,
            lambda_t: 0.01,
            delta_max: 30,
            termination: Termination::TimeLimit(Duration::from_secs(60)),
            rng_seed: 0,
        }
    }
}

impl EngineConfig {
    /// Defaults for `inst`: `t_max = n/2`, `t_min = m/2`, `lambda_t = 0.01`,
    /// `delta_max = 30`, 60 s budget.
    ///
    /// On instances with `m > n` the minimum is clamped to the maximum, and
    /// an empty instance gets `t_max = t_min = 1`.
    pub fn for_instance(inst: &Instance) -> Self {
        let t_max = inst.n() as f64 / 2.0;
        let t_min = inst.m() as f64 / 2.0;
        let (t_max, t_min) = if t_max <= 0.0 {
            (1.0, 1.0)
        } else if t_min <= 0.0 {
            (t_max, t_max.min(0.5))
        } else {
            (t_max, t_min.min(t_max))
        };
        Self {
            t_max,
            t_min,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_min > 0.0 && self.t_min <= self.t_max && self.t_max.is_finite()) {
            return Err(ConfigError::Temperatures {
                t_min: self.t_min,
                t_max: self.t_max,
            });
        }
        if !(self.lambda_t > 0.0 && self.lambda_t < 1.0) {
            return Err(ConfigError::DecayRate(self.lambda_t));
        }
        Ok(())
    }
}

/// Where an inspector is being called from within an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Construct,
    AfterBurn,
    AfterReform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub band: Option<BurnBand>,
    pub improved: bool,
    pub restarted: bool,
    pub reheated: bool,
    /// Temperature used by this iteration's burn.
    pub burn_temperature: f64,
}

/// Mutable state of one run.
pub struct Engine<'a> {
    inst: &'a Instance,
    config: EngineConfig,
    rng: ChaCha8Rng,
    sorted: SortedList,
    inserter: Inserter,
    temperature: f64,
    no_improve: u64,
    current: Solution,
    best: Option<Solution>,
    iteration: u64,
}

impl<'a> Engine<'a> {
    /// Initializes the state and builds the first solution from the
    /// Sorted_List, which becomes the best when it is already complete.
    /// `inst` must already be window-adjusted.
    pub fn new(inst: &'a Instance, config: EngineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let sorted = build_sorted_list(inst);
        let mut inserter = Inserter::new();
        let current = construct(inst, &sorted, &mut inserter);
        let best = (current.is_complete() && current.is_feasible()).then(|| current.clone());
        Ok(Self {
            inst,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            temperature: config.t_max,
            config,
            sorted,
            inserter,
            no_improve: 0,
            current,
            best,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn no_improve(&self) -> u64 {
        self.no_improve
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn current(&self) -> &Solution {
        &self.current
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    pub fn sorted_list(&self) -> &SortedList {
        &self.sorted
    }

    pub fn into_best(self) -> Option<Solution> {
        self.best
    }

    /// One iteration of the main loop.
    pub fn step(&mut self) -> StepReport {
        self.step_inspected(|_, _| {})
    }

    /// One iteration, calling `inspect` on the solution after burn and after
    /// reform.
    pub fn step_inspected(&mut self, mut inspect: impl FnMut(Phase, &Solution)) -> StepReport {
        let inst = self.inst;
        let burn_temperature = self.temperature;
        let band = burn(
            inst,
            &mut self.current,
            self.temperature,
            &self.sorted,
            &mut self.inserter,
            &mut self.rng,
        );
        inspect(Phase::AfterBurn, &self.current);
        reform(inst, &mut self.current, &mut self.inserter, &mut self.rng);
        inspect(Phase::AfterReform, &self.current);

        let improved = self.current.is_feasible()
            && self.current.is_complete()
            && self
                .best
                .as_ref()
                .is_none_or(|b| self.current.cost() < b.cost());
        if improved {
            self.best = Some(self.current.clone());
        } else {
            self.no_improve += 1;
        }

        let restarted = self.no_improve > self.config.delta_max;
        if restarted {
            if let Some(best) = &self.best {
                self.current = best.clone();
            }
            self.no_improve = 0;
        }

        let (t, reheated) = step_temperature(self.temperature, &self.config, &mut self.rng);
        self.temperature = t;
        self.iteration += 1;
        StepReport {
            band,
            improved,
            restarted,
            reheated,
            burn_temperature,
        }
    }

    fn record(&self, started: Instant, event: TraceEvent) -> TraceRecord {
        TraceRecord {
            // whole microseconds, so the CSV form reads back identically
            elapsed_ms: (started.elapsed().as_secs_f64() * 1e6).round() / 1000.0,
            iteration: self.iteration,
            temperature: self.temperature,
            best_cost: self.best.as_ref().map(Solution::cost),
            best_served: self.best.as_ref().map_or(0, Solution::served_count),
            current_cost: self.current.cost(),
            current_served: self.current.served_count(),
            event,
        }
    }
}

/// Ticks are emitted every 100 iterations, and additionally every 10 ms
/// under a wall-clock budget (iteration-bounded runs stay deterministic).
const TICK_ITERATIONS: u64 = 100;
const TICK_INTERVAL: Duration = Duration::from_millis(10);

/// Summary of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub best: Option<Solution>,
    pub iterations: u64,
    pub elapsed: Duration,
    pub improvements: u64,
    pub restarts: u64,
    pub reheats: u64,
}

/// Runs the full annealing loop until the configured termination.
pub fn anneal(
    inst: &Instance,
    config: &EngineConfig,
    observer: &mut dyn FnMut(&TraceRecord),
) -> Result<RunOutcome, ConfigError> {
    anneal_inspected(inst, config, observer, &mut |_, _| {})
}

/// [`anneal`] with a hook on every intermediate solution.
pub fn anneal_inspected(
    inst: &Instance,
    config: &EngineConfig,
    observer: &mut dyn FnMut(&TraceRecord),
    inspect: &mut dyn FnMut(Phase, &Solution),
) -> Result<RunOutcome, ConfigError> {
    let started = Instant::now();
    let mut engine = Engine::new(inst, config.clone())?;
    inspect(Phase::Construct, &engine.current);
    observer(&engine.record(started, TraceEvent::Construct));

    let (deadline, max_iterations, timed) = match config.termination {
        Termination::TimeLimit(d) => (Some(started + d), u64::MAX, true),
        Termination::Iterations(k) => (None, k, false),
    };
    let mut last_tick = (started, 0u64);
    let (mut improvements, mut restarts, mut reheats) = (0, 0, 0);
    while engine.iteration < max_iterations && deadline.is_none_or(|d| Instant::now() < d) {
        let report = engine.step_inspected(&mut *inspect);
        let mut emitted = false;
        for (flag, event) in [
            (report.improved, TraceEvent::Improve),
            (report.restarted, TraceEvent::Restart),
            (report.reheated, TraceEvent::Reheat),
        ] {
            if flag {
                observer(&engine.record(started, event));
                emitted = true;
            }
        }
        improvements += u64::from(report.improved);
        restarts += u64::from(report.restarted);
        reheats += u64::from(report.reheated);
        let now = if timed { Some(Instant::now()) } else { None };
        if !emitted {
            let due = engine.iteration - last_tick.1 >= TICK_ITERATIONS
                || now.is_some_and(|t| t - last_tick.0 >= TICK_INTERVAL);
            if due {
                observer(&engine.record(started, TraceEvent::Tick));
                emitted = true;
            }
        }
        if emitted {
            last_tick = (now.unwrap_or(started), engine.iteration);
        }
    }
    let iterations = engine.iteration;
    Ok(RunOutcome {
        best: engine.into_best(),
        iterations,
        elapsed: started.elapsed(),
        improvements,
        restarts,
        reheats,
    })
}
