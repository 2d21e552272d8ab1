//! Independent re-check of solutions, written without reusing the fast
//! scheduler's code paths.
//!
//! Feasibility of a fixed visit order is decided exactly: begin-of-service
//! times form a system of difference constraints, which is satisfiable iff
//! its constraint graph has no negative cycle (Bellman-Ford). A slower grid
//! search over depot departure and pickup waits is provided for cross-checks
//! on short routes.

use std::fmt;

use crate::instance::Instance;
use crate::schedule::{Route, Schedule, Scheduler, Violations};
use crate::solution::Solution;
use crate::EPS;

/// Outcome of [`validate`]. Disagreements are content, not errors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub structural: Vec<String>,
    pub recomputed_cost: f64,
    pub fast_cost: f64,
    pub claimed_cost: Option<f64>,
    pub served: usize,
    pub n: usize,
    /// Per route: a violation-free schedule exists.
    pub exact_feasible: Vec<bool>,
    /// Per route: the eight-step schedule has zero violations.
    pub fast_feasible: Vec<bool>,
    pub fast_violations: Violations,
    pub disagreements: Vec<String>,
}

impl ValidationReport {
    pub fn is_complete(&self) -> bool {
        self.served == self.n
    }

    pub fn is_feasible(&self) -> bool {
        self.structural.is_empty() && self.exact_feasible.iter().all(|&f| f)
    }

    /// No structural error, every route feasible, and no disagreement.
    pub fn is_clean(&self) -> bool {
        self.is_feasible() && self.disagreements.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "served            {}/{}", self.served, self.n)?;
        writeln!(f, "recomputed cost   {:.6}", self.recomputed_cost)?;
        if let Some(c) = self.claimed_cost {
            writeln!(f, "claimed cost      {c:.6}")?;
        }
        let v = &self.fast_violations;
        writeln!(
            f,
            "violations        load={} duration={} time_window={} ride_time={}",
            v.load, v.duration, v.time_window, v.ride_time
        )?;
        let infeasible: Vec<String> = self
            .exact_feasible
            .iter()
            .enumerate()
            .filter(|(_, &ok)| !ok)
            .map(|(k, _)| k.to_string())
            .collect();
        if !infeasible.is_empty() {
            writeln!(f, "infeasible routes {}", infeasible.join(" "))?;
        }
        for s in &self.structural {
            writeln!(f, "structural error: {s}")?;
        }
        for d in &self.disagreements {
            writeln!(f, "disagreement: {d}")?;
        }
        write!(
            f,
            "verdict           {}",
            if self.is_clean() && self.is_complete() {
                "ok"
            } else {
                "FAILED"
            }
        )
    }
}

fn distance(inst: &Instance, a: usize, b: usize) -> f64 {
    let (p, q) = (inst.vertex(a), inst.vertex(b));
    ((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y)).sqrt()
}

fn route_structure(inst: &Instance, route: &Route, out: &mut Vec<String>) -> bool {
    let n = inst.n();
    let k = route.vehicle;
    let before = out.len();
    let position = |x: usize| route.visits.iter().position(|&y| y == x);
    for (pos, &v) in route.visits.iter().enumerate() {
        if v == 0 || v > 2 * n {
            out.push(format!("route {k}: vertex {v} is not a request vertex"));
        } else if route.visits[..pos].contains(&v) {
            out.push(format!("route {k}: vertex {v} repeated"));
        } else if v <= n {
            match position(v + n) {
                None => out.push(format!("route {k}: request {v} has no dropoff")),
                Some(d) if d < pos => out.push(format!(
                    "route {k}: request {v} dropped off before pickup (precedence)"
                )),
                Some(_) => {}
            }
        } else if position(v - n).is_none() {
            out.push(format!("route {k}: request {} has no pickup", v - n));
        }
    }
    out.len() == before
}

/// Decides whether any schedule for `visits` meets every time window, the
/// ride-time bound and the route-duration bound.
pub fn exact_schedule_exists(inst: &Instance, visits: &[usize]) -> bool {
    if visits.is_empty() {
        return true;
    }
    let k = visits.len();
    let n = inst.n();
    let depot = inst.depot();
    // nodes: 0 = depot departure, 1..=k visits, k+1 = depot return, k+2 = origin
    let zero = k + 2;
    let node_vertex = |j: usize| if j == 0 || j == k + 1 { 0 } else { visits[j - 1] };
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    // x_b - x_a <= w  ->  edge a -> b with weight w
    let mut le = |b: usize, a: usize, w: f64| edges.push((a, b, w));
    for j in 1..=k + 1 {
        let prev = node_vertex(j - 1);
        let service = if j == 1 { 0.0 } else { inst.vertex(prev).service_duration };
        le(j - 1, j, -(service + distance(inst, prev, node_vertex(j))));
    }
    le(zero, 0, -depot.window_open);
    le(0, zero, depot.window_close);
    le(zero, k + 1, -depot.window_open);
    for j in 1..=k {
        let v = inst.vertex(visits[j - 1]);
        le(zero, j, -v.window_open);
        le(j, zero, v.window_close);
        if visits[j - 1] > n {
            let origin = visits[..j - 1]
                .iter()
                .position(|&x| x == visits[j - 1] - n)
                .map(|p| p + 1);
            if let Some(o) = origin {
                let service = inst.vertex(visits[o - 1]).service_duration;
                le(j, o, service + inst.ride_time_bound());
            }
        }
    }
    le(k + 1, 0, inst.route_duration_bound());

    let nodes = k + 3;
    let mut dist = vec![0.0f64; nodes];
    for _ in 0..nodes {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if dist[a] + w < dist[b] - EPS {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Capacity check by plain accumulation.
fn load_ok(inst: &Instance, visits: &[usize]) -> bool {
    let mut load = 0;
    for &v in visits {
        load += inst.vertex(v).load_change;
        if load > inst.capacity() {
            return false;
        }
    }
    true
}

/// Recomputes load, duration, window and ride violations of a given schedule by forward simulation, also
/// checking that its times are self-consistent.
pub fn check_schedule(
    inst: &Instance,
    route: &Route,
    schedule: &Schedule,
) -> Result<Violations, String> {
    let mut prev = 0;
    let mut leave = schedule.depot_departure;
    let mut load = 0;
    let mut max_load = 0;
    let mut tw = 0.0;
    let mut ride = 0.0;
    let mut departed = vec![None; inst.vertex_count()];
    if schedule.visits.len() != route.visits.len() {
        return Err("schedule length differs from route".into());
    }
    if schedule.depot_departure < inst.depot().window_open - EPS {
        return Err("depot departure before the depot opens".into());
    }
    for (t, &v) in schedule.visits.iter().zip(&route.visits) {
        let vx = inst.vertex(v);
        let arrive = leave + distance(inst, prev, v);
        if (t.arrival - arrive).abs() > 1e-6 {
            return Err(format!("vertex {v}: arrival {} but chain gives {arrive}", t.arrival));
        }
        if t.begin < vx.window_open - EPS || t.begin < arrive - EPS {
            return Err(format!("vertex {v}: service begins at {} too early", t.begin));
        }
        if (t.wait - (t.begin - t.arrival)).abs() > 1e-6 {
            return Err(format!("vertex {v}: inconsistent wait"));
        }
        if t.begin > vx.window_close + EPS {
            tw += t.begin - vx.window_close;
        }
        load += vx.load_change;
        max_load = max_load.max(load);
        if v > inst.n() {
            let Some(dep) = departed[v - inst.n()] else {
                return Err(format!("vertex {v}: dropoff before pickup"));
            };
            let r: f64 = t.begin - dep;
            if r > inst.ride_time_bound() + EPS {
                ride += r - inst.ride_time_bound();
            }
        } else {
            departed[v] = Some(t.begin + vx.service_duration);
        }
        leave = t.begin + vx.service_duration;
        prev = v;
    }
    let duration = if route.visits.is_empty() {
        0.0
    } else {
        (leave + distance(inst, prev, 0)).max(inst.depot().window_open) - schedule.depot_departure
    };
    let over = duration - inst.route_duration_bound();
    Ok(Violations {
        load: (max_load - inst.capacity()).max(0) as f64,
        duration: if over > EPS { over } else { 0.0 },
        time_window: tw,
        ride_time: ride,
    })
}

/// Re-checks `solution` from scratch and compares with the fast evaluator.
pub fn validate(inst: &Instance, solution: &Solution) -> ValidationReport {
    validate_routes(inst, solution.routes(), solution.unserved().len(), None)
}

/// Like [`validate`] but also compares against a claimed cost.
pub fn validate_claimed(inst: &Instance, solution: &Solution, claimed: f64) -> ValidationReport {
    validate_routes(inst, solution.routes(), solution.unserved().len(), Some(claimed))
}

/// Validates raw routes, which need not form a well-structured solution.
pub fn validate_routes(
    inst: &Instance,
    routes: &[Route],
    unserved_count: usize,
    claimed_cost: Option<f64>,
) -> ValidationReport {
    let mut report = ValidationReport {
        n: inst.n(),
        claimed_cost,
        ..Default::default()
    };
    let mut scheduler = Scheduler::new();
    let mut seen = vec![0usize; inst.n() + 1];
    for route in routes {
        let mut legs = 0.0;
        let mut prev = 0;
        for &v in route.visits.iter().filter(|&&v| v < inst.vertex_count()) {
            legs += distance(inst, prev, v);
            prev = v;
        }
        legs += distance(inst, prev, 0);
        report.recomputed_cost += legs;

        if !route_structure(inst, route, &mut report.structural) {
            report.exact_feasible.push(false);
            report.fast_feasible.push(false);
            continue;
        }
        for &v in route.visits.iter().filter(|&&v| v <= inst.n()) {
            seen[v] += 1;
        }
        let exact = load_ok(inst, &route.visits) && exact_schedule_exists(inst, &route.visits);
        let (schedule, summary) = scheduler.evaluate_detailed(inst, &route.visits);
        let fast = summary.is_feasible();
        report.fast_cost += summary.cost;
        report.fast_violations += summary.violations;
        match check_schedule(inst, route, &schedule) {
            Ok(v) => {
                if (v.total() - summary.violations.total()).abs() > 1e-6 {
                    report.disagreements.push(format!(
                        "route {}: scheduler reports violations {:?}, its schedule has {:?}",
                        route.vehicle, summary.violations, v
                    ));
                }
            }
            Err(e) => report
                .disagreements
                .push(format!("route {}: inconsistent schedule: {e}", route.vehicle)),
        }
        if exact != fast {
            report.disagreements.push(format!(
                "route {}: eight-step says {}, exact check says {}",
                route.vehicle,
                if fast { "feasible" } else { "infeasible" },
                if exact { "feasible" } else { "infeasible" }
            ));
        }
        report.exact_feasible.push(exact);
        report.fast_feasible.push(fast);
    }
    for (r, &count) in seen.iter().enumerate().skip(1) {
        if count > 1 {
            report.structural.push(format!("request {r} served {count} times"));
        }
    }
    report.served = seen.iter().skip(1).filter(|&&c| c > 0).count();
    if report.served + unserved_count != inst.n() {
        report.structural.push(format!(
            "{} served + {} unserved does not cover {} requests",
            report.served,
            unserved_count,
            inst.n()
        ));
    }
    if (report.recomputed_cost - report.fast_cost).abs() > 1e-6 {
        report.disagreements.push(format!(
            "cost mismatch: evaluator {:.6}, legs sum to {:.6}",
            report.fast_cost, report.recomputed_cost
        ));
    }
    if let Some(c) = claimed_cost {
        if (c - report.recomputed_cost).abs() > 1e-6 {
            report.disagreements.push(format!(
                "cost mismatch: claimed {c:.6}, legs sum to {:.6}",
                report.recomputed_cost
            ));
        }
    }
    report
}

/// Exhaustive search for a violation-free schedule on a time grid: depot
/// departures `e0 + k·step` and added waits `k·step` at every pickup after
/// the first. Dropoffs are served as early as possible, and departures that
/// would only wait at the first vertex are skipped.
///
/// Exponential in the number of pickups; intended for routes of at most
/// three requests.
pub fn grid_schedule_exists(inst: &Instance, visits: &[usize], step: f64) -> bool {
    if visits.is_empty() {
        return true;
    }
    if !load_ok(inst, visits) {
        return false;
    }
    let depot = inst.depot();
    let first = visits[0];
    let t0 = distance(inst, 0, first);
    let last_departure = inst.vertex(first).window_close - t0;
    let mut departed = vec![0.0; inst.vertex_count()];
    let idle = inst.vertex(first).window_open - t0 - depot.window_open;
    let mut k = if idle > 0.0 {
        (idle / step + 1e-6).floor() as u32
    } else {
        0
    };
    loop {
        let d0 = depot.window_open + f64::from(k) * step;
        if d0 > last_departure + EPS || d0 > depot.window_close + EPS {
            return false;
        }
        let begin = (d0 + t0).max(inst.vertex(first).window_open);
        departed[first] = begin + inst.vertex(first).service_duration;
        if grid_dfs(inst, visits, 1, d0, departed[first], &mut departed, step) {
            return true;
        }
        k += 1;
    }
}

fn grid_dfs(
    inst: &Instance,
    visits: &[usize],
    j: usize,
    d0: f64,
    leave: f64,
    departed: &mut [f64],
    step: f64,
) -> bool {
    let prev = visits[j - 1];
    if j == visits.len() {
        let back = (leave + distance(inst, prev, 0)).max(inst.depot().window_open);
        return back - d0 <= inst.route_duration_bound() + EPS;
    }
    let v = visits[j];
    let vx = inst.vertex(v);
    let earliest = (leave + distance(inst, prev, v)).max(vx.window_open);
    if v > inst.n() {
        if earliest > vx.window_close + EPS
            || earliest - departed[v - inst.n()] > inst.ride_time_bound() + EPS
        {
            return false;
        }
        return grid_dfs(inst, visits, j + 1, d0, earliest + vx.service_duration, departed, step);
    }
    let mut k = 0u32;
    loop {
        let begin = earliest + f64::from(k) * step;
        // Every bound below only gets tighter as the wait grows.
        if begin > vx.window_close + EPS || begin - d0 > inst.route_duration_bound() + EPS {
            return false;
        }
        let onboard_late = visits[..=j].iter().any(|&p| {
            if p > inst.n() || visits[..j].contains(&(p + inst.n())) {
                return false;
            }
            let drop = p + inst.n();
            let reach = begin + vx.service_duration + distance(inst, v, drop);
            let left = if p == v { begin + vx.service_duration } else { departed[p] };
            reach - left > inst.ride_time_bound() + EPS
                || reach > inst.vertex(drop).window_close + EPS
        });
        if onboard_late {
            return false;
        }
        departed[v] = begin + vx.service_duration;
        if grid_dfs(inst, visits, j + 1, d0, departed[v], departed, step) {
            return true;
        }
        k += 1;
    }
}
