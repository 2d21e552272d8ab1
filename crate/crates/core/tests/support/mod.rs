//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;

use mata_darp::{parse_named_instance, Instance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Draft {
    m: usize,
    capacity: i32,
    duration: f64,
    ride: f64,
    // depot first, then pickups, then dropoffs: (x, y, service, load, open, close)
    vertices: Vec<(f64, f64, f64, i32, f64, f64)>,
}

impl Draft {
    fn text(&self) -> String {
        let n = (self.vertices.len() - 1) / 2;
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.m,
            2 * n,
            self.duration,
            self.capacity,
            self.ride
        );
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {} {} {} {}", v.0, v.1, v.2, v.3, v.4, v.5);
        }
        out
    }

    fn build(&self, name: &str) -> Instance {
        parse_named_instance(name, &self.text()).expect("generated instance parses")
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Cordeau-Laporte style: square [-10, 10], one seat per request, service
/// 3, horizon 1440, 15-minute windows on the pickup of outbound requests
/// and on the dropoff of inbound ones. Not tightened.
pub fn cl_like(n: usize, m: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let horizon = 1440.0;
    let mut points: Vec<(f64, f64)> = (0..=2 * n)
        .map(|_| (round3(r.random_range(-10.0..10.0)), round3(r.random_range(-10.0..10.0))))
        .collect();
    points[0] = (0.0, 0.0);
    let mut vertices = vec![(0.0, 0.0, 0.0, 0, 0.0, horizon)];
    let mut windows = vec![(0.0, horizon); 2 * n + 1];
    for i in 1..=n {
        let a: f64 = r.random_range(60.0f64..1300.0).round();
        if i <= n / 2 {
            windows[i + n] = (a, a + 15.0);
        } else {
            windows[i] = (a, a + 15.0);
        }
    }
    for i in 1..=2 * n {
        let load = if i <= n { 1 } else { -1 };
        vertices.push((points[i].0, points[i].1, 3.0, load, windows[i].0, windows[i].1));
    }
    Draft {
        m,
        capacity: 6,
        duration: 480.0,
        ride: 90.0,
        vertices,
    }
    .build(&format!("cl{n}_{seed}"))
}

/// Random visit order for `requests` with every pickup before its dropoff.
pub fn interleave(rng: &mut ChaCha8Rng, requests: &[usize], n: usize) -> Vec<usize> {
    let mut pending: Vec<usize> = requests.to_vec();
    let mut onboard: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(2 * requests.len());
    while !pending.is_empty() || !onboard.is_empty() {
        let k = rng.random_range(0..pending.len() + onboard.len());
        if k < pending.len() {
            let p = pending.swap_remove(k);
            out.push(p);
            onboard.push(p);
        } else {
            let p = onboard.swap_remove(k - pending.len());
            out.push(p + n);
        }
    }
    out
}

/// Instance with a planted feasible complete solution: requests are dealt
/// to vehicles, each route is simulated and windows are placed around the
/// simulated service times.
pub fn planted(n: usize, m: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let horizon = 1440.0;
    let mut pts: Vec<(f64, f64)> = (0..=2 * n)
        .map(|_| (round3(r.random_range(-10.0..10.0)), round3(r.random_range(-10.0..10.0))))
        .collect();
    pts[0] = (0.0, 0.0);
    let dist = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let service = 3.0;
    let mut begin = vec![0.0; 2 * n + 1];
    let mut owner: Vec<Vec<usize>> = vec![Vec::new(); m.max(1)];
    for i in 1..=n {
        let k = r.random_range(0..m.max(1));
        owner[k].push(i);
    }
    let mut longest_ride: f64 = 0.0;
    let mut longest_route: f64 = 0.0;
    for reqs in &owner {
        if reqs.is_empty() {
            continue;
        }
        let order = interleave(&mut r, reqs, n);
        let start: f64 = r.random_range(30.0f64..600.0).round();
        let mut t = start;
        let mut prev = 0;
        for &v in &order {
            t += dist(prev, v);
            // occasional idle time so that waits matter
            if r.random_bool(0.3) {
                t += r.random_range(0.0..5.0);
            }
            begin[v] = t;
            t += service;
            prev = v;
        }
        t += dist(prev, 0);
        longest_route = longest_route.max(t - start);
        for &p in reqs {
            longest_ride = longest_ride.max(begin[p + n] - begin[p] - service);
        }
    }
    let mut vertices = vec![(0.0, 0.0, 0.0, 0, 0.0, horizon)];
    for i in 1..=2 * n {
        let narrow = if i <= n { i > n / 2 } else { i - n <= n / 2 };
        let (open, close) = if narrow {
            let before: f64 = r.random_range(0.0..10.0);
            ((begin[i] - before).floor().max(0.0), (begin[i] + 15.0 - before).ceil())
        } else {
            (0.0, horizon)
        };
        let load = if i <= n { 1 } else { -1 };
        vertices.push((pts[i].0, pts[i].1, service, load, open, close));
    }
    Draft {
        m,
        capacity: 6,
        duration: (longest_route + 30.0).ceil().max(120.0),
        ride: (longest_ride + 10.0).ceil().max(30.0),
        vertices,
    }
    .build(&format!("planted{n}_{seed}"))
}

/// Points on the x axis at integer coordinates with integer services,
/// windows and bounds, so every schedule constraint has integer data and a
/// 0.1-minute grid search is exact.
pub fn lattice(n: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let horizon = 60.0;
    let mut vertices = vec![(0.0, 0.0, 0.0, 0, 0.0, horizon)];
    let mut windows = vec![(0.0, horizon); 2 * n + 1];
    for i in 1..=n {
        let width = f64::from(r.random_range(0..=8));
        let open = f64::from(r.random_range(0..40));
        if r.random_bool(0.5) {
            windows[i] = (open, open + width);
        } else {
            windows[i + n] = (open + 5.0, open + 5.0 + width);
        }
    }
    for i in 1..=2 * n {
        let x = f64::from(r.random_range(-8..=8));
        let s = f64::from(r.random_range(0..=2));
        let load = if i <= n { r.random_range(1..=2) } else { 0 };
        vertices.push((x, 0.0, s, load, windows[i].0, windows[i].1));
    }
    for i in 1..=n {
        vertices[i + n].3 = -vertices[i].3;
    }
    Draft {
        m: 1,
        capacity: r.random_range(2..=4),
        duration: f64::from(r.random_range(15..=60)),
        ride: f64::from(r.random_range(4..=20)),
        vertices,
    }
    .build(&format!("lattice{n}_{seed}"))
}

/// Random precedence-respecting route over `k` distinct requests.
pub fn random_route(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (1..=n).collect();
    all.shuffle(rng);
    interleave(rng, &all[..k.min(n)], n)
}
