//! Solutions: `m` routes plus the unserved requests, with evaluation and the
//! plain-text solution format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::Instance;
use crate::schedule::{Route, RouteError, RouteSummary, Scheduler, Violations};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionError {
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("request {0} is served by more than one route")]
    ServedTwice(usize),
    #[error("request {0} is both served and listed as unserved")]
    ServedAndUnserved(usize),
    #[error("request {0} is neither served nor listed as unserved")]
    Missing(usize),
    #[error("request index {0} out of range")]
    UnknownRequest(usize),
    #[error("expected {expected} routes, found {found}")]
    RouteCount { expected: usize, found: usize },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    routes: Vec<Route>,
    summaries: Vec<RouteSummary>,
    unserved: BTreeSet<usize>,
    /// Route index serving each request (slot 0 unused).
    location: Vec<Option<usize>>,
}

impl Solution {
    /// `x₀ = ∅`: every vehicle idle, every request unserved.
    pub fn empty(inst: &Instance) -> Self {
        let empty = RouteSummary {
            cost: 0.0,
            duration: 0.0,
            max_load: 0,
            violations: Violations::ZERO,
        };
        Self {
            routes: (0..inst.m()).map(|k| Route::new(k, Vec::new())).collect(),
            summaries: vec![empty; inst.m()],
            unserved: (1..=inst.n()).collect(),
            location: vec![None; inst.n() + 1],
        }
    }

    /// Builds a solution from explicit routes; requests absent from every
    /// route become unserved.
    pub fn from_routes(inst: &Instance, routes: Vec<Route>) -> Result<Self, SolutionError> {
        if routes.len() != inst.m() {
            return Err(SolutionError::RouteCount {
                expected: inst.m(),
                found: routes.len(),
            });
        }
        let mut location = vec![None; inst.n() + 1];
        let mut scheduler = Scheduler::new();
        let mut summaries = Vec::with_capacity(routes.len());
        for (k, route) in routes.iter().enumerate() {
            route.check_structure(inst)?;
            for &v in &route.visits {
                if inst.is_pickup(v) {
                    if location[v].is_some() {
                        return Err(SolutionError::ServedTwice(v));
                    }
                    location[v] = Some(k);
                }
            }
            summaries.push(scheduler.evaluate(inst, &route.visits));
        }
        let unserved = (1..=inst.n()).filter(|&r| location[r].is_none()).collect();
        let routes = routes
            .into_iter()
            .enumerate()
            .map(|(k, r)| Route::new(k, r.visits))
            .collect();
        Ok(Self {
            routes,
            summaries,
            unserved,
            location,
        })
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route_summaries(&self) -> &[RouteSummary] {
        &self.summaries
    }

    pub fn unserved(&self) -> &BTreeSet<usize> {
        &self.unserved
    }

    /// `r(x)`.
    pub fn served_count(&self) -> usize {
        self.location.len() - 1 - self.unserved.len()
    }

    pub fn is_served(&self, request: usize) -> bool {
        matches!(self.location.get(request), Some(Some(_)))
    }

    pub fn route_of(&self, request: usize) -> Option<usize> {
        self.location.get(request).copied().flatten()
    }

    /// `x ∈ ℂ`: all requests served.
    pub fn is_complete(&self) -> bool {
        self.unserved.is_empty()
    }

    /// Cached `f(x)`: total travel time over all routes.
    pub fn cost(&self) -> f64 {
        self.summaries.iter().map(|s| s.cost).sum()
    }

    /// Cached violations from the last evaluation of every route.
    pub fn cached_violations(&self) -> Violations {
        self.summaries
            .iter()
            .fold(Violations::ZERO, |acc, s| acc + s.violations)
    }

    pub fn is_feasible(&self) -> bool {
        self.summaries.iter().all(RouteSummary::is_feasible)
    }

    /// Removes both vertices of `request` and re-evaluates its route.
    /// Returns `false` when the request was not served.
    pub fn remove_request(
        &mut self,
        inst: &Instance,
        scheduler: &mut Scheduler,
        request: usize,
    ) -> bool {
        let Some(k) = self.location[request] else {
            return false;
        };
        let dropoff = inst.dropoff_of(request);
        let visits = &mut self.routes[k].visits;
        visits.retain(|&v| v != request && v != dropoff);
        self.summaries[k] = scheduler.evaluate(inst, visits);
        self.location[request] = None;
        self.unserved.insert(request);
        true
    }

    /// Inserts `request` with its pickup before index `pickup_pos` and its
    /// dropoff before index `dropoff_pos` of the resulting sequence.
    pub(crate) fn insert_request(
        &mut self,
        inst: &Instance,
        request: usize,
        route: usize,
        pickup_pos: usize,
        dropoff_pos: usize,
        summary: RouteSummary,
    ) {
        debug_assert!(self.location[request].is_none());
        let visits = &mut self.routes[route].visits;
        visits.insert(pickup_pos, request);
        visits.insert(dropoff_pos, inst.dropoff_of(request));
        self.summaries[route] = summary;
        self.location[request] = Some(route);
        self.unserved.remove(&request);
    }

    /// Checks that requests are partitioned between routes and `unserved`.
    pub fn check_partition(&self, inst: &Instance) -> Result<(), SolutionError> {
        let mut owner = vec![None; inst.n() + 1];
        for (k, route) in self.routes.iter().enumerate() {
            route.check_structure(inst)?;
            for &v in route.visits.iter().filter(|&&v| inst.is_pickup(v)) {
                if owner[v].replace(k).is_some() {
                    return Err(SolutionError::ServedTwice(v));
                }
            }
        }
        for r in 1..=inst.n() {
            match (owner[r].is_some(), self.unserved.contains(&r)) {
                (true, true) => return Err(SolutionError::ServedAndUnserved(r)),
                (false, false) => return Err(SolutionError::Missing(r)),
                _ => {}
            }
        }
        Ok(())
    }

    /// Writes the solution text format with begin-of-service times.
    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cost {}", self.cost());
        if self.unserved.is_empty() {
            out.push_str("unserved -\n");
        } else {
            let list: Vec<String> = self.unserved.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "unserved {}", list.join(" "));
        }
        let mut scheduler = Scheduler::new();
        for route in &self.routes {
            let (schedule, _) = scheduler.evaluate_detailed(inst, &route.visits);
            let _ = write!(out, "route {}:", route.vehicle);
            for t in &schedule.visits {
                let _ = write!(out, " {}@{:.3}", t.vertex, t.begin);
            }
            out.push('\n');
        }
        out
    }
}

/// Recomputes `(q, d, w, t)` for every route from scratch.
pub fn violations(inst: &Instance, solution: &Solution) -> Result<Violations, RouteError> {
    let mut scheduler = Scheduler::new();
    let mut total = Violations::ZERO;
    for route in solution.routes() {
        route.check_structure(inst)?;
        total += scheduler.evaluate(inst, &route.visits).violations;
    }
    Ok(total)
}

/// Recomputes `f(x)` as the sum of route travel times.
pub fn cost(inst: &Instance, solution: &Solution) -> Result<f64, RouteError> {
    let mut total = 0.0;
    for route in solution.routes() {
        route.check_structure(inst)?;
        total += route.travel_cost(inst);
    }
    Ok(total)
}

pub fn is_complete(solution: &Solution) -> bool {
    solution.is_complete()
}

/// A solution read from text, with the cost it claimed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub claimed_cost: f64,
    pub claimed_unserved: Vec<usize>,
    pub routes: Vec<Route>,
}

impl ParsedSolution {
    /// Rebuilds the in-memory solution; times in the file are ignored.
    pub fn into_solution(self, inst: &Instance) -> Result<Solution, SolutionError> {
        let solution = Solution::from_routes(inst, self.routes)?;
        for &r in &self.claimed_unserved {
            if r == 0 || r > inst.n() {
                return Err(SolutionError::UnknownRequest(r));
            }
            if solution.is_served(r) {
                return Err(SolutionError::ServedAndUnserved(r));
            }
        }
        if let Some(r) = solution
            .unserved()
            .iter()
            .find(|r| !self.claimed_unserved.contains(r))
        {
            return Err(SolutionError::Missing(*r));
        }
        Ok(solution)
    }
}

pub fn parse_solution(text: &str) -> Result<ParsedSolution, SolutionError> {
    let syntax = |line: usize, reason: String| SolutionError::Syntax { line, reason };
    let mut claimed_cost = None;
    let mut claimed_unserved = None;
    let mut routes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        let (key, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        match key {
            "cost" => {
                let c: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, format!("bad cost {:?}", rest.trim())))?;
                claimed_cost = Some(c);
            }
            "unserved" => {
                let rest = rest.trim();
                let list = if rest == "-" || rest.is_empty() {
                    Vec::new()
                } else {
                    rest.split_whitespace()
                        .map(|t| {
                            t.parse()
                                .map_err(|_| syntax(line, format!("bad request index {t:?}")))
                        })
                        .collect::<Result<Vec<usize>, _>>()?
                };
                claimed_unserved = Some(list);
            }
            "route" => {
                let (label, visits) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line, "missing ':' after route index".into()))?;
                let vehicle: usize = label
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, format!("bad route index {:?}", label.trim())))?;
                if vehicle != routes.len() {
                    return Err(syntax(
                        line,
                        format!("route {vehicle} out of order, expected {}", routes.len()),
                    ));
                }
                let visits = visits
                    .split_whitespace()
                    .map(|t| {
                        let vid = t.split_once('@').map_or(t, |(v, _)| v);
                        vid.parse()
                            .map_err(|_| syntax(line, format!("bad visit {t:?}")))
                    })
                    .collect::<Result<Vec<usize>, _>>()?;
                routes.push(Route::new(vehicle, visits));
            }
            other => return Err(syntax(line, format!("unknown record {other:?}"))),
        }
    }
    Ok(ParsedSolution {
        claimed_cost: claimed_cost.ok_or_else(|| syntax(0, "missing cost line".into()))?,
        claimed_unserved: claimed_unserved
            .ok_or_else(|| syntax(0, "missing unserved line".into()))?,
        routes,
    })
}
