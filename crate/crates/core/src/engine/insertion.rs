//! Two-step request insertion (neighborhood reduction): pickup positions are
//! ranked by detour, then dropoff positions are scanned for the first pickup
//! position admitting a feasible route.

use thiserror::Error;

use crate::instance::Instance;
use crate::schedule::{RouteSummary, Scheduler};
use crate::solution::Solution;
use crate::EPS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InsertionError {
    #[error("request {0} is already served")]
    AlreadyServed(usize),
    #[error("request {0} does not exist")]
    UnknownRequest(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub request: usize,
    pub route: usize,
    /// Index of the pickup in the new visit sequence.
    pub pickup_pos: usize,
    /// Index of the dropoff in the new visit sequence.
    pub dropoff_pos: usize,
    pub cost_increase: f64,
    pub(crate) summary: RouteSummary,
}

impl Placement {
    pub fn apply(&self, inst: &Instance, solution: &mut Solution) {
        solution.insert_request(
            inst,
            self.request,
            self.route,
            self.pickup_pos,
            self.dropoff_pos,
            self.summary,
        );
    }
}

/// Scratch state for repeated insertions.
#[derive(Debug, Default, Clone)]
pub struct Inserter {
    scheduler: Scheduler,
    candidate: Vec<usize>,
    ranked: Vec<(f64, usize)>,
    earliest_departure: Vec<f64>,
    load_after: Vec<i32>,
    /// Skip the necessary-condition filters and evaluate every candidate.
    pub exhaustive: bool,
}

impl Inserter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scheduler(&mut self) -> &mut Scheduler {
        &mut self.scheduler
    }

    /// Cheapest feasible placement of an unserved request, or `None`.
    ///
    /// Ties go to the lowest route index, then the earliest pickup and
    /// dropoff positions.
    pub fn best_insertion(
        &mut self,
        inst: &Instance,
        solution: &Solution,
        request: usize,
    ) -> Result<Option<Placement>, InsertionError> {
        if request == 0 || request > inst.n() {
            return Err(InsertionError::UnknownRequest(request));
        }
        if solution.is_served(request) {
            return Err(InsertionError::AlreadyServed(request));
        }
        let mut best: Option<Placement> = None;
        for k in 0..solution.routes().len() {
            let bound = best.as_ref().map(|b| b.cost_increase);
            if let Some(p) = self.best_in_route(inst, solution, request, k, bound) {
                if best
                    .as_ref()
                    .is_none_or(|b| p.cost_increase < b.cost_increase)
                {
                    best = Some(p);
                }
            }
        }
        Ok(best)
    }

    fn best_in_route(
        &mut self,
        inst: &Instance,
        solution: &Solution,
        request: usize,
        k: usize,
        bound: Option<f64>,
    ) -> Option<Placement> {
        let visits = &solution.routes()[k].visits;
        let old_cost = solution.route_summaries()[k].cost;
        let pickup = request;
        let dropoff = inst.dropoff_of(request);
        let pv = inst.vertex(pickup);
        let len = visits.len();

        self.ranked.clear();
        for p in 0..=len {
            let prev = if p == 0 { 0 } else { visits[p - 1] };
            let next = if p == len { 0 } else { visits[p] };
            let detour = inst.tt(prev, pickup) + inst.tt(pickup, next) - inst.tt(prev, next);
            self.ranked.push((detour, p));
        }
        self.ranked
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        // Earliest departures (no voluntary waiting) and loads along the route.
        self.earliest_departure.clear();
        self.load_after.clear();
        let mut t = inst.depot().window_open;
        let mut prev = 0;
        let mut load = 0;
        for &v in visits {
            let vx = inst.vertex(v);
            t = (t + inst.tt(prev, v)).max(vx.window_open) + vx.service_duration;
            load += vx.load_change;
            self.earliest_departure.push(t);
            self.load_after.push(load);
            prev = v;
        }

        let ride_bound = inst.ride_time_bound();
        let mut best: Option<Placement> = None;
        for r in 0..self.ranked.len() {
            let (detour, p) = self.ranked[r];
            if !self.exhaustive {
                // Any placement from here on costs at least the pickup detour
                // and could not beat an earlier route.
                if bound.is_some_and(|b| detour > b + 1e-9) {
                    break;
                }
                let (prev, leave) = if p == 0 {
                    (0, inst.depot().window_open)
                } else {
                    (visits[p - 1], self.earliest_departure[p - 1])
                };
                let load_before = if p == 0 { 0 } else { self.load_after[p - 1] };
                if (leave + inst.tt(prev, pickup)).max(pv.window_open) > pv.window_close + EPS
                    || load_before + pv.load_change > inst.capacity()
                {
                    continue;
                }
            }
            // Ride lower bound: pickup's departure to dropoff along the route.
            let mut chain = 0.0;
            let mut last = pickup;
            for q in (p + 1)..=(len + 1) {
                if q > p + 1 {
                    let between = visits[q - 2];
                    if !self.exhaustive
                        && self.load_after[q - 2] + pv.load_change > inst.capacity()
                    {
                        break;
                    }
                    chain += inst.tt(last, between) + inst.vertex(between).service_duration;
                    last = between;
                }
                if !self.exhaustive && chain + inst.tt(last, dropoff) > ride_bound + 1e-6 {
                    break;
                }
                self.candidate.clear();
                self.candidate.extend_from_slice(&visits[..p]);
                self.candidate.push(pickup);
                self.candidate.extend_from_slice(&visits[p..q - 1]);
                self.candidate.push(dropoff);
                self.candidate.extend_from_slice(&visits[q - 1..]);
                let summary = if self.exhaustive {
                    self.scheduler.evaluate(inst, &self.candidate)
                } else {
                    match self.scheduler.evaluate_if_feasible(inst, &self.candidate) {
                        Some(s) => s,
                        None => continue,
                    }
                };
                if !summary.is_feasible() {
                    continue;
                }
                let increase = summary.cost - old_cost;
                if best.as_ref().is_none_or(|b| increase < b.cost_increase) {
                    best = Some(Placement {
                        request,
                        route: k,
                        pickup_pos: p,
                        dropoff_pos: q,
                        cost_increase: increase,
                        summary,
                    });
                }
            }
            if best.is_some() {
                break;
            }
        }
        best
    }
}
