//! Multi-seed benchmark trials, checkpoint medians and gaps to best known
//! solutions.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{anneal_inspected, EngineConfig, Phase};
use crate::exec::Execution;
use crate::instance::Instance;
use crate::solution::Solution;
use crate::trace::TraceRecord;
use crate::validate::validate;

pub const DEFAULT_CHECKPOINTS_S: [f64; 6] = [1.0, 2.0, 5.0, 15.0, 30.0, 60.0];
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Best known solution costs of the standard instances used in the
/// benchmark protocol.
const KNOWN_BKS: [(&str, &str, f64); 4] = [
    ("R1a", "pr01", 190.02),
    ("R3a", "pr03", 532.00),
    ("R6a", "pr06", 785.26),
    ("R8a", "pr08", 487.84),
];

/// Looks up a bundled BKS by instance name (`R1a` or its file alias `pr01`).
pub fn known_bks(name: &str) -> Option<f64> {
    KNOWN_BKS
        .iter()
        .find(|(a, b, _)| a.eq_ignore_ascii_case(name) || b.eq_ignore_ascii_case(name))
        .map(|&(_, _, bks)| bks)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("best known cost must be positive, got {0}")]
pub struct GapError(pub f64);

/// Percentage excess of `cost` over `bks`.
pub fn gap(cost: f64, bks: f64) -> Result<f64, GapError> {
    if bks.is_nan() || bks <= 0.0 {
        return Err(GapError(bks));
    }
    Ok(100.0 * (cost - bks) / bks)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOptions {
    /// Re-validate the solution after every burn and every reform.
    pub verify_each_step: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub records: Vec<TraceRecord>,
    pub best: Option<Solution>,
    pub iterations: u64,
    /// Intermediate solutions re-checked by the validator.
    pub checked: u64,
    /// Checked solutions that were not violation-free.
    pub check_failures: u64,
}

/// Runs one seeded trial and keeps its whole trace.
pub fn run_trial(
    inst: &Instance,
    config: &EngineConfig,
    seed: u64,
    options: &TrialOptions,
) -> Result<TrialResult, String> {
    let config = config.clone().with_seed(seed);
    let mut records = Vec::new();
    let mut checked = 0;
    let mut check_failures = 0;
    let mut inspect = |phase: Phase, sol: &Solution| {
        if options.verify_each_step && phase != Phase::Construct {
            checked += 1;
            let report = validate(inst, sol);
            if !(report.is_clean() && report.fast_violations.is_zero()) {
                check_failures += 1;
            }
        }
    };
    let outcome = anneal_inspected(inst, &config, &mut |r| records.push(r.clone()), &mut inspect)
        .map_err(|e| e.to_string())?;
    Ok(TrialResult {
        seed,
        records,
        best: outcome.best,
        iterations: outcome.iterations,
        checked,
        check_failures,
    })
}

/// Runs one trial per seed, in parallel when `exec` allows it.
pub fn run_trials(
    inst: &Instance,
    config: &EngineConfig,
    seeds: &[u64],
    options: &TrialOptions,
    exec: Execution,
) -> Vec<Result<TrialResult, String>> {
    exec.map(seeds, |&seed| run_trial(inst, config, seed, options))
}

/// Best cost of the last record at or before `at_ms`.
pub fn checkpoint_cost(records: &[TraceRecord], at_ms: f64) -> Option<f64> {
    records
        .iter()
        .take_while(|r| r.elapsed_ms <= at_ms)
        .last()
        .and_then(|r| r.best_cost)
}

/// First record carrying a best solution: `(elapsed_ms, cost)`.
pub fn first_feasible(records: &[TraceRecord]) -> Option<(f64, f64)> {
    records
        .iter()
        .find_map(|r| r.best_cost.map(|c| (r.elapsed_ms, c)))
}

/// Median with absent values ranked above every present one; `None` when
/// the median itself falls on an absent value.
pub fn median(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.unwrap_or(f64::INFINITY)).collect();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    let m = if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    };
    m.is_finite().then_some(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub seed: u64,
    pub checkpoint_costs: Vec<Option<f64>>,
    pub first_feasible: Option<(f64, f64)>,
    pub final_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub instance: String,
    pub checkpoints_s: Vec<f64>,
    pub bks: Option<f64>,
    pub trials: Vec<TrialSummary>,
    pub median_checkpoint_costs: Vec<Option<f64>>,
    pub median_first_feasible_ms: Option<f64>,
    pub median_final_cost: Option<f64>,
    pub final_gap: Option<f64>,
    pub failed: Vec<(u64, String)>,
}

/// Builds the summary from stored traces only.
pub fn summarize(
    instance: &str,
    traces: &[(u64, Vec<TraceRecord>)],
    checkpoints_s: &[f64],
    bks: Option<f64>,
) -> BenchSummary {
    let trials: Vec<TrialSummary> = traces
        .iter()
        .map(|(seed, records)| TrialSummary {
            seed: *seed,
            checkpoint_costs: checkpoints_s
                .iter()
                .map(|&s| checkpoint_cost(records, s * 1000.0))
                .collect(),
            first_feasible: first_feasible(records),
            final_cost: records.last().and_then(|r| r.best_cost),
        })
        .collect();
    let median_checkpoint_costs = (0..checkpoints_s.len())
        .map(|c| median(&trials.iter().map(|t| t.checkpoint_costs[c]).collect::<Vec<_>>()))
        .collect();
    let median_final_cost = median(&trials.iter().map(|t| t.final_cost).collect::<Vec<_>>());
    let median_first_feasible_ms = median(
        &trials
            .iter()
            .map(|t| t.first_feasible.map(|f| f.0))
            .collect::<Vec<_>>(),
    );
    let final_gap = match (median_final_cost, bks) {
        (Some(c), Some(b)) => gap(c, b).ok(),
        _ => None,
    };
    BenchSummary {
        instance: instance.to_string(),
        checkpoints_s: checkpoints_s.to_vec(),
        bks,
        trials,
        median_checkpoint_costs,
        median_first_feasible_ms,
        median_final_cost,
        final_gap,
        failed: Vec::new(),
    }
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.decimals$}"))
}

impl BenchSummary {
    fn header(&self) -> Vec<String> {
        let mut h = vec![
            "instance".to_string(),
            "seed".into(),
            "first_feasible_ms".into(),
            "first_feasible_cost".into(),
        ];
        h.extend(self.checkpoints_s.iter().map(|s| format!("cost@{s}s")));
        h.push("final_cost".into());
        h.push("final_gap_pct".into());
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let gap_of = |c: Option<f64>| match (c, self.bks) {
            (Some(c), Some(b)) => gap(c, b).ok(),
            _ => None,
        };
        let mut rows: Vec<Vec<String>> = self
            .trials
            .iter()
            .map(|t| {
                let mut row = vec![
                    self.instance.clone(),
                    t.seed.to_string(),
                    cell(t.first_feasible.map(|f| f.0), 3),
                    cell(t.first_feasible.map(|f| f.1), 2),
                ];
                row.extend(t.checkpoint_costs.iter().map(|&c| cell(c, 2)));
                row.push(cell(t.final_cost, 2));
                row.push(cell(gap_of(t.final_cost), 2));
                row
            })
            .collect();
        let mut med = vec![
            self.instance.clone(),
            "median".into(),
            cell(self.median_first_feasible_ms, 3),
            "-".into(),
        ];
        med.extend(self.median_checkpoint_costs.iter().map(|&c| cell(c, 2)));
        med.push(cell(self.median_final_cost, 2));
        med.push(cell(self.final_gap, 2));
        rows.push(med);
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let header = self.header();
        let rows = self.rows();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                rows.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in std::iter::once(&header).chain(rows.iter()) {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        if let Some(b) = self.bks {
            let _ = writeln!(out, "bks {b:.2}");
        }
        for (seed, err) in &self.failed {
            let _ = writeln!(out, "seed {seed} failed: {err}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceEvent;
    use proptest::prelude::*;

    fn rec(ms: f64, best: Option<f64>) -> TraceRecord {
        TraceRecord {
            elapsed_ms: ms,
            iteration: 0,
            temperature: 1.0,
            best_cost: best,
            best_served: 0,
            current_cost: 0.0,
            current_served: 0,
            event: TraceEvent::Tick,
        }
    }

    #[test]
    fn gap_values() {
        assert_eq!(gap(190.02, 190.02).unwrap(), 0.0);
        assert_eq!(gap(200.0, 100.0).unwrap(), 100.0);
        assert_eq!(gap(1.0, 0.0), Err(GapError(0.0)));
        assert!(gap(1.0, -3.0).is_err());
    }

    #[test]
    fn bundled_bks() {
        assert_eq!(known_bks("R1a"), Some(190.02));
        assert_eq!(known_bks("pr06"), Some(785.26));
        assert_eq!(known_bks("r8a"), Some(487.84));
        assert_eq!(known_bks("R2a"), None);
    }

    proptest! {
        #[test]
        fn gap_strictly_increasing(a in 0.0f64..1e4, d in 1e-6f64..1e3, bks in 1.0f64..1e4) {
            prop_assert!(gap(a, bks).unwrap() < gap(a + d, bks).unwrap());
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[Some(3.0)]), Some(3.0));
        assert_eq!(median(&[Some(3.0), None, Some(1.0)]), Some(3.0));
        assert_eq!(median(&[None, None, Some(1.0)]), None);
        assert_eq!(median(&[Some(1.0), Some(2.0)]), Some(1.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn checkpoints_use_last_record_before() {
        let records = vec![
            rec(0.5, None),
            rec(800.0, Some(250.0)),
            rec(1500.0, Some(240.0)),
            rec(2500.0, Some(230.0)),
        ];
        assert_eq!(checkpoint_cost(&records, 100.0), None);
        assert_eq!(checkpoint_cost(&records, 1000.0), Some(250.0));
        assert_eq!(checkpoint_cost(&records, 2000.0), Some(240.0));
        assert_eq!(checkpoint_cost(&records, 60_000.0), Some(230.0));
        assert_eq!(first_feasible(&records), Some((800.0, 250.0)));
    }

    #[test]
    fn summary_from_stored_traces_is_identical() {
        use crate::engine::Termination;
        use crate::instance::parse_instance;
        use crate::trace::{parse_trace_csv, write_trace_csv};
        use std::time::Duration;

        let inst = parse_instance(
            "2 6 480 3 30\n\
             0 0 0 0 0 0 200\n\
             1 3 1 1 1 0 200\n\
             2 -2 4 1 1 0 200\n\
             3 5 -1 1 1 0 200\n\
             4 6 3 1 -1 0 200\n\
             5 -5 6 1 -1 0 200\n\
             6 1 -7 1 -1 0 200\n",
        )
        .unwrap();
        let config = EngineConfig::for_instance(&inst)
            .with_termination(Termination::TimeLimit(Duration::from_millis(40)));
        let trials = run_trials(&inst, &config, &[1, 2, 3], &TrialOptions::default(), Execution::Sequential);
        let traces: Vec<(u64, Vec<TraceRecord>)> = trials
            .into_iter()
            .map(|t| t.map(|t| (t.seed, t.records)).unwrap())
            .collect();
        let stored: Vec<(u64, Vec<TraceRecord>)> = traces
            .iter()
            .map(|(s, r)| (*s, parse_trace_csv(&write_trace_csv(r)).unwrap()))
            .collect();
        let checkpoints = [0.001, 0.005, 0.01, 0.02];
        let a = summarize("x", &traces, &checkpoints, Some(30.0));
        let b = summarize("x", &stored, &checkpoints, Some(30.0));
        assert_eq!(a, b);
        assert_eq!(a.to_table(), b.to_table());
        for (_, records) in &traces {
            assert!(records.windows(2).all(|w| w[0].elapsed_ms <= w[1].elapsed_ms));
            let bests: Vec<f64> = records.iter().filter_map(|r| r.best_cost).collect();
            assert!(bests.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn single_seed_summary_equals_trial() {
        let records = vec![rec(0.1, None), rec(3.0, Some(200.0)), rec(1200.0, Some(195.0))];
        let s = summarize("R1a", &[(7, records)], &[1.0, 2.0], Some(190.02));
        assert_eq!(s.median_checkpoint_costs, vec![Some(200.0), Some(195.0)]);
        assert_eq!(s.median_final_cost, Some(195.0));
        assert_eq!(s.median_first_feasible_ms, Some(3.0));
        assert!((s.final_gap.unwrap() - gap(195.0, 190.02).unwrap()).abs() < 1e-12);
        let csv = s.to_csv();
        assert!(csv.starts_with("instance,seed,first_feasible_ms,first_feasible_cost,cost@1s,cost@2s,final_cost,final_gap_pct\n"));
        assert!(csv.contains("\nR1a,median,3.000,-,200.00,195.00,195.00,2.62\n"));
    }
}
