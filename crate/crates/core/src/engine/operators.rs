use rand::Rng;

use super::insertion::Inserter;
use super::sequence::{build_random_list, SortedList};
use super::EngineConfig;
use crate::instance::Instance;
use crate::solution::Solution;

/// Inserts requests in list order at their best feasible positions, leaving
/// those without a feasible placement unserved.
pub fn construct(inst: &Instance, sorted: &SortedList, inserter: &mut Inserter) -> Solution {
    let mut solution = Solution::empty(inst);
    for &request in sorted.as_slice() {
        if let Some(p) = inserter
            .best_insertion(inst, &solution, request)
            .expect("request is unserved")
        {
            p.apply(inst, &mut solution);
        }
    }
    solution
}

/// The contiguous band of Sorted_List positions (1-based, inclusive) hit by
/// one burn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BurnBand {
    pub radius: usize,
    pub start: usize,
    pub end: usize,
    /// Requests in the band that were actually served and got removed.
    pub removed: usize,
}

impl BurnBand {
    pub fn size(&self) -> usize {
        self.end + 1 - self.start
    }
}

/// Upper end of the band radius draw: `floor(T)`, at least 1.
pub fn burn_radius_limit(temperature: f64) -> usize {
    (temperature.floor() as usize).max(1)
}

/// Removes the requests at Sorted_List positions `start..=min(n, start+R)`
/// with `R ~ U[1, floor(T)]` and `start ~ U[1, n]`.
pub fn burn<R: Rng + ?Sized>(
    inst: &Instance,
    solution: &mut Solution,
    temperature: f64,
    sorted: &SortedList,
    inserter: &mut Inserter,
    rng: &mut R,
) -> Option<BurnBand> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let radius = rng.random_range(1..=burn_radius_limit(temperature));
    let start = rng.random_range(1..=n);
    Some(burn_band(inst, solution, sorted, inserter, radius, start))
}

/// Deterministic core of [`burn`] for given draws.
pub fn burn_band(
    inst: &Instance,
    solution: &mut Solution,
    sorted: &SortedList,
    inserter: &mut Inserter,
    radius: usize,
    start: usize,
) -> BurnBand {
    let end = sorted.len().min(start + radius);
    let mut removed = 0;
    for pos in start..=end {
        if solution.remove_request(inst, inserter.scheduler(), sorted.at(pos)) {
            removed += 1;
        }
    }
    BurnBand {
        radius,
        start,
        end,
        removed,
    }
}

/// Re-inserts every request in a fresh random order, pulling served requests
/// out of their routes first.
pub fn reform<R: Rng + ?Sized>(
    inst: &Instance,
    solution: &mut Solution,
    inserter: &mut Inserter,
    rng: &mut R,
) {
    let order = build_random_list(inst.n(), rng);
    for &request in order.as_slice() {
        solution.remove_request(inst, inserter.scheduler(), request);
        if let Some(p) = inserter
            .best_insertion(inst, solution, request)
            .expect("request was just removed")
        {
            p.apply(inst, solution);
        }
    }
}

/// Geometric cooling with a uniform reheat into `[t_min, t_max]` once the
/// temperature falls below `t_min`. Returns the new temperature and whether a
/// reheat happened.
pub fn step_temperature<R: Rng + ?Sized>(
    temperature: f64,
    config: &EngineConfig,
    rng: &mut R,
) -> (f64, bool) {
    let cooled = temperature * (1.0 - config.lambda_t);
    if cooled < config.t_min {
        let t = if config.t_max > config.t_min {
            rng.random_range(config.t_min..=config.t_max)
        } else {
            config.t_min
        };
        (t, true)
    } else {
        (cooled, false)
    }
}
