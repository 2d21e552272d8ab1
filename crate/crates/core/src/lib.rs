//! Multi-atomic annealing for the static dial-a-ride problem.
//!
//! Instances use the Cordeau-Laporte text format. The solver alternates a
//! burn operator (remove a band of requests in sorted order, reinsert) with a
//! reform operator (remove and reinsert every request in random order) under
//! a cooling schedule with reheats and restarts from the best solution.
//!
//! ```
//! use mata_darp::{anneal, parse_instance, EngineConfig, Termination};
//!
//! let inst = parse_instance(
//!     "1 2 480 6 90\n0 0 0 0 0 0 100\n1 3 0 0 1 0 100\n2 6 0 0 -1 0 100\n",
//! ).unwrap();
//! let config = EngineConfig::for_instance(&inst).with_termination(Termination::Iterations(10));
//! let out = anneal(&inst, &config, &mut |_| {}).unwrap();
//! assert_eq!(out.best.unwrap().cost(), 12.0);
//! ```

pub mod bench;
pub mod engine;
pub mod exec;
pub mod instance;
pub mod oracle;
pub mod schedule;
pub mod solution;
pub mod trace;
pub mod validate;

/// Tolerance below which a violation or cost difference counts as zero.
pub const EPS: f64 = 1e-9;

pub use engine::{anneal, anneal_inspected, Engine, EngineConfig, RunOutcome, Termination};
pub use exec::Execution;
pub use instance::{parse_instance, parse_named_instance, Instance, InstanceError};
pub use oracle::{exact_solve, OracleResult};
pub use schedule::{evaluate_route, Route, Schedule, Violations};
pub use solution::{parse_solution, Solution};
pub use trace::{TraceEvent, TraceRecord};
pub use validate::{validate, ValidationReport};
