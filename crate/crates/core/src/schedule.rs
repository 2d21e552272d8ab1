//! Route scheduling with forward time slack (eight-step evaluation) and the
//! four constraint violations: load, duration, time window and ride time.

use std::ops::{Add, AddAssign};

use thiserror::Error;

use crate::instance::Instance;
use crate::EPS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("route {vehicle}: vertex {vertex} is not a request vertex")]
    UnknownVertex { vehicle: usize, vertex: usize },
    #[error("route {vehicle}: vertex {vertex} visited more than once")]
    Duplicate { vehicle: usize, vertex: usize },
    #[error("route {vehicle}: request {request} is missing its pickup or dropoff")]
    Unpaired { vehicle: usize, request: usize },
    #[error("route {vehicle}: dropoff of request {request} precedes its pickup")]
    Precedence { vehicle: usize, request: usize },
}

/// Ordered visits of one vehicle. Depot start and end are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Route {
    pub vehicle: usize,
    pub visits: Vec<usize>,
}

impl Route {
    pub fn new(vehicle: usize, visits: Vec<usize>) -> Self {
        Self { vehicle, visits }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Travel cost including both depot legs.
    pub fn travel_cost(&self, inst: &Instance) -> f64 {
        path_cost(inst, &self.visits)
    }

    /// Checks pairing and precedence of every request on the route.
    pub fn check_structure(&self, inst: &Instance) -> Result<(), RouteError> {
        let vehicle = self.vehicle;
        let mut seen = vec![usize::MAX; inst.vertex_count()];
        for (pos, &v) in self.visits.iter().enumerate() {
            if v == 0 || v >= inst.vertex_count() {
                return Err(RouteError::UnknownVertex { vehicle, vertex: v });
            }
            if seen[v] != usize::MAX {
                return Err(RouteError::Duplicate { vehicle, vertex: v });
            }
            seen[v] = pos;
        }
        for &v in &self.visits {
            let request = inst.request_of(v).expect("non-depot");
            let (p, d) = (seen[request], seen[inst.dropoff_of(request)]);
            if p == usize::MAX || d == usize::MAX {
                return Err(RouteError::Unpaired { vehicle, request });
            }
            if d < p {
                return Err(RouteError::Precedence { vehicle, request });
            }
        }
        Ok(())
    }
}

pub(crate) fn path_cost(inst: &Instance, visits: &[usize]) -> f64 {
    let mut prev = 0;
    let mut cost = 0.0;
    for &v in visits {
        cost += inst.tt(prev, v);
        prev = v;
    }
    cost + inst.tt(prev, 0)
}

/// Constraint violations in passengers (load) and minutes (the rest).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violations {
    pub load: f64,
    pub duration: f64,
    pub time_window: f64,
    pub ride_time: f64,
}

impl Violations {
    pub const ZERO: Violations = Violations {
        load: 0.0,
        duration: 0.0,
        time_window: 0.0,
        ride_time: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn total(&self) -> f64 {
        self.load + self.duration + self.time_window + self.ride_time
    }
}

impl Add for Violations {
    type Output = Violations;

    fn add(self, o: Violations) -> Violations {
        Violations {
            load: self.load + o.load,
            duration: self.duration + o.duration,
            time_window: self.time_window + o.time_window,
            ride_time: self.ride_time + o.ride_time,
        }
    }
}

impl AddAssign for Violations {
    fn add_assign(&mut self, o: Violations) {
        *self = *self + o;
    }
}

/// `x ∈ 𝔽`: every violation is zero.
pub fn is_feasible(v: &Violations) -> bool {
    v.is_zero()
}

#[inline]
fn excess(x: f64) -> f64 {
    if x > EPS {
        x
    } else {
        0.0
    }
}

/// Timing of one visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisitTimes {
    pub vertex: usize,
    pub arrival: f64,
    pub begin: f64,
    pub wait: f64,
    pub departure: f64,
    pub load: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub depot_departure: f64,
    pub depot_return: f64,
    pub visits: Vec<VisitTimes>,
    /// `(request, ride time)` in dropoff order.
    pub ride_times: Vec<(usize, f64)>,
    pub duration: f64,
    pub max_load: i32,
    pub travel_cost: f64,
}

/// Aggregate outcome of evaluating one route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSummary {
    pub cost: f64,
    pub duration: f64,
    pub max_load: i32,
    pub violations: Violations,
}

impl RouteSummary {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_zero()
    }
}

/// Reusable buffers for the eight-step scheme.
///
/// Index `0` holds the start depot and index `k + 1` the end depot.
#[derive(Debug, Default, Clone)]
pub struct Scheduler {
    nodes: Vec<usize>,
    arrival: Vec<f64>,
    begin: Vec<f64>,
    wait: Vec<f64>,
    departure: Vec<f64>,
    position: Vec<usize>,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    fn load(&mut self, inst: &Instance, visits: &[usize]) {
        let len = visits.len() + 2;
        self.nodes.clear();
        self.nodes.push(0);
        self.nodes.extend_from_slice(visits);
        self.nodes.push(0);
        for buf in [
            &mut self.arrival,
            &mut self.begin,
            &mut self.wait,
            &mut self.departure,
        ] {
            buf.clear();
            buf.resize(len, 0.0);
        }
        if self.position.len() < inst.vertex_count() {
            self.position.resize(inst.vertex_count(), 0);
        }
        for (j, &v) in visits.iter().enumerate() {
            self.position[v] = j + 1;
        }
    }

    fn forward(&mut self, inst: &Instance, from: usize) {
        for j in from..self.nodes.len() {
            let (prev, cur) = (self.nodes[j - 1], self.nodes[j]);
            let v = inst.vertex(cur);
            let a = self.departure[j - 1] + inst.tt(prev, cur);
            let b = a.max(v.window_open);
            self.arrival[j] = a;
            self.begin[j] = b;
            self.wait[j] = b - a;
            self.departure[j] = b + v.service_duration;
        }
    }

    fn set_depot_departure(&mut self, t: f64) {
        self.arrival[0] = t;
        self.begin[0] = t;
        self.wait[0] = 0.0;
        self.departure[0] = t;
    }

    /// Forward time slack of the visit at index `i` with the sum of waits
    /// strictly after it.
    fn slack(&self, inst: &Instance, i: usize) -> (f64, f64) {
        let ride_bound = inst.ride_time_bound();
        let mut waits = 0.0;
        let mut slack = (inst.vertex(self.nodes[i]).window_close - self.begin[i]).max(0.0);
        for j in (i + 1)..self.nodes.len() {
            waits += self.wait[j];
            let v = self.nodes[j];
            let mut room = inst.vertex(v).window_close - self.begin[j];
            if inst.is_dropoff(v) {
                let origin = self.position[v - inst.n()];
                // Only passengers already on board when leaving `i` ride longer.
                if origin < i {
                    let ride = self.begin[j] - self.departure[origin];
                    room = room.min(ride_bound - ride);
                }
            }
            slack = slack.min(waits + room.max(0.0));
        }
        (slack, waits)
    }

    /// Runs the eight-step scheme over `visits` and leaves the schedule in
    /// the internal buffers.
    fn schedule(&mut self, inst: &Instance, visits: &[usize]) {
        self.load(inst, visits);
        let depot_open = inst.depot().window_open;
        // (1)-(2) earliest departure and forward pass
        self.set_depot_departure(depot_open);
        self.forward(inst, 1);
        // (3)-(5) delay the depot departure as far as downstream waits allow
        let (slack, waits) = self.slack(inst, 0);
        self.set_depot_departure(depot_open + slack.min(waits));
        self.forward(inst, 1);
        // (6)-(7) shift each pickup to reduce ride times downstream
        for j in 1..=visits.len() {
            if !inst.is_pickup(self.nodes[j]) {
                continue;
            }
            let (slack, waits) = self.slack(inst, j);
            let delay = slack.min(waits);
            if delay > 0.0 {
                self.wait[j] += delay;
                self.begin[j] += delay;
                self.departure[j] += delay;
                self.forward(inst, j + 1);
            }
        }
    }

    /// (8) duration, loads, ride times and violations of the scheduled route.
    fn summarize(&self, inst: &Instance) -> RouteSummary {
        let k = self.nodes.len() - 2;
        if k == 0 {
            return RouteSummary {
                cost: 0.0,
                duration: 0.0,
                max_load: 0,
                violations: Violations::ZERO,
            };
        }
        let mut cost = 0.0;
        let mut load = 0;
        let mut max_load = 0;
        let mut tw = 0.0;
        let mut ride = 0.0;
        for j in 1..=k {
            let v = self.nodes[j];
            let vx = inst.vertex(v);
            cost += inst.tt(self.nodes[j - 1], v);
            load += vx.load_change;
            max_load = max_load.max(load);
            tw += excess(self.begin[j] - vx.window_close);
            if inst.is_dropoff(v) {
                let origin = self.position[v - inst.n()];
                ride += excess(self.begin[j] - self.departure[origin] - inst.ride_time_bound());
            }
        }
        cost += inst.tt(self.nodes[k], 0);
        let duration = self.begin[k + 1] - self.departure[0];
        RouteSummary {
            cost,
            duration,
            max_load,
            violations: Violations {
                load: (max_load - inst.capacity()).max(0) as f64,
                duration: excess(duration - inst.route_duration_bound()),
                time_window: tw,
                ride_time: ride,
            },
        }
    }

    /// Evaluates a structurally valid visit sequence without re-checking it.
    pub fn evaluate(&mut self, inst: &Instance, visits: &[usize]) -> RouteSummary {
        self.schedule(inst, visits);
        self.summarize(inst)
    }

    /// Like [`Scheduler::evaluate`] but only for feasible routes. Gives up
    /// early when the route is over capacity or misses a window even with
    /// every visit served as early as possible, since the eight-step scheme
    /// only ever delays service.
    pub fn evaluate_if_feasible(&mut self, inst: &Instance, visits: &[usize]) -> Option<RouteSummary> {
        let mut load = 0;
        for &v in visits {
            load += inst.vertex(v).load_change;
            if load > inst.capacity() {
                return None;
            }
        }
        self.load(inst, visits);
        self.set_depot_departure(inst.depot().window_open);
        self.forward(inst, 1);
        let late = (1..=visits.len())
            .any(|j| self.begin[j] - inst.vertex(self.nodes[j]).window_close > EPS);
        if late {
            return None;
        }
        let summary = self.evaluate(inst, visits);
        summary.is_feasible().then_some(summary)
    }

    /// Full schedule for a structurally valid visit sequence.
    pub fn evaluate_detailed(
        &mut self,
        inst: &Instance,
        visits: &[usize],
    ) -> (Schedule, RouteSummary) {
        let summary = self.evaluate(inst, visits);
        let k = visits.len();
        let mut load = 0;
        let mut times = Vec::with_capacity(k);
        let mut ride_times = Vec::new();
        for j in 1..=k {
            let v = self.nodes[j];
            load += inst.vertex(v).load_change;
            times.push(VisitTimes {
                vertex: v,
                arrival: self.arrival[j],
                begin: self.begin[j],
                wait: self.wait[j],
                departure: self.departure[j],
                load,
            });
            if inst.is_dropoff(v) {
                let r = v - inst.n();
                ride_times.push((r, self.begin[j] - self.departure[self.position[r]]));
            }
        }
        let schedule = Schedule {
            depot_departure: self.departure[0],
            depot_return: if k == 0 { self.departure[0] } else { self.begin[k + 1] },
            visits: times,
            ride_times,
            duration: summary.duration,
            max_load: summary.max_load,
            travel_cost: summary.cost,
        };
        (schedule, summary)
    }
}

/// Schedules `route` and returns its timing and violation contribution.
pub fn evaluate_route(
    inst: &Instance,
    route: &Route,
) -> Result<(Schedule, Violations), RouteError> {
    route.check_structure(inst)?;
    let (schedule, summary) = Scheduler::new().evaluate_detailed(inst, &route.visits);
    Ok((schedule, summary.violations))
}
