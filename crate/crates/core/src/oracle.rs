//! Exhaustive exact solver for tiny instances.
//!
//! For every subset of requests the cheapest feasible visit order is found by
//! enumerating all precedence-respecting interleavings; every assignment of
//! requests to vehicles is then scored from those per-subset optima.

use thiserror::Error;

use crate::exec::Execution;
use crate::instance::Instance;
use crate::schedule::{Route, Scheduler};
use crate::solution::Solution;

pub const MAX_REQUESTS: usize = 5;
pub const MAX_VEHICLES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} requests and {m} vehicles; the exact solver handles at most {MAX_REQUESTS} and {MAX_VEHICLES}")]
    TooLarge { n: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `None` when no feasible complete solution exists.
    pub optimal_cost: Option<f64>,
    pub optimal_solution: Option<Solution>,
    /// Visit orders evaluated plus vehicle assignments scored.
    pub explored: u64,
}

#[derive(Debug, Clone)]
struct SubsetBest {
    cost: Option<f64>,
    visits: Vec<usize>,
    explored: u64,
}

fn best_order(inst: &Instance, mask: u32) -> SubsetBest {
    let n = inst.n();
    let requests: Vec<usize> = (1..=n).filter(|r| mask & (1 << (r - 1)) != 0).collect();
    let mut best = SubsetBest {
        cost: if requests.is_empty() { Some(0.0) } else { None },
        visits: Vec::new(),
        explored: 0,
    };
    if requests.is_empty() {
        return best;
    }
    let mut scheduler = Scheduler::new();
    let mut seq = Vec::with_capacity(2 * requests.len());
    let mut picked = vec![false; requests.len()];
    let mut dropped = vec![false; requests.len()];
    interleave(
        inst,
        &requests,
        &mut seq,
        &mut picked,
        &mut dropped,
        &mut scheduler,
        &mut best,
    );
    best
}

fn interleave(
    inst: &Instance,
    requests: &[usize],
    seq: &mut Vec<usize>,
    picked: &mut [bool],
    dropped: &mut [bool],
    scheduler: &mut Scheduler,
    best: &mut SubsetBest,
) {
    if seq.len() == 2 * requests.len() {
        best.explored += 1;
        let summary = scheduler.evaluate(inst, seq);
        if summary.is_feasible() && best.cost.is_none_or(|c| summary.cost < c) {
            best.cost = Some(summary.cost);
            best.visits = seq.clone();
        }
        return;
    }
    for (k, &r) in requests.iter().enumerate() {
        if !picked[k] {
            picked[k] = true;
            seq.push(r);
            interleave(inst, requests, seq, picked, dropped, scheduler, best);
            seq.pop();
            picked[k] = false;
        } else if !dropped[k] {
            dropped[k] = true;
            seq.push(inst.dropoff_of(r));
            interleave(inst, requests, seq, picked, dropped, scheduler, best);
            seq.pop();
            dropped[k] = false;
        }
    }
}

/// Minimum-cost feasible complete solution by enumeration.
pub fn exact_solve(inst: &Instance) -> Result<OracleResult, OracleError> {
    exact_solve_with(inst, Execution::default())
}

pub fn exact_solve_with(inst: &Instance, exec: Execution) -> Result<OracleResult, OracleError> {
    let (n, m) = (inst.n(), inst.m());
    if n > MAX_REQUESTS || m > MAX_VEHICLES {
        return Err(OracleError::TooLarge { n, m });
    }
    let masks: Vec<u32> = (0..(1u32 << n)).collect();
    let subsets = exec.map(&masks, |&mask| best_order(inst, mask));
    let mut explored: u64 = subsets.iter().map(|s| s.explored).sum();

    if m == 0 {
        let feasible = n == 0;
        return Ok(OracleResult {
            optimal_cost: feasible.then_some(0.0),
            optimal_solution: feasible.then(|| Solution::empty(inst)),
            explored,
        });
    }

    // assignment[r] = vehicle of request r + 1, enumerated in base m
    let mut best: Option<(f64, Vec<u32>)> = None;
    let total = (m as u64).pow(n as u32);
    for code in 0..total {
        explored += 1;
        let mut masks = vec![0u32; m];
        let mut c = code;
        for r in 0..n {
            masks[(c % m as u64) as usize] |= 1 << r;
            c /= m as u64;
        }
        let mut cost = 0.0;
        let mut feasible = true;
        for &mask in &masks {
            match subsets[mask as usize].cost {
                Some(c) => cost += c,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, masks));
        }
    }

    let Some((cost, masks)) = best else {
        return Ok(OracleResult {
            optimal_cost: None,
            optimal_solution: None,
            explored,
        });
    };
    let routes = masks
        .iter()
        .enumerate()
        .map(|(k, &mask)| Route::new(k, subsets[mask as usize].visits.clone()))
        .collect();
    let solution = Solution::from_routes(inst, routes).expect("enumerated routes are well formed");
    Ok(OracleResult {
        optimal_cost: Some(cost),
        optimal_solution: Some(solution),
        explored,
    })
}
