//! Problem data: vertices, requests, bounds and the travel-time matrix.
//!
//! Vertex `0` is the depot, vertices `1..=n` are pickups and `n+1..=2n` the
//! matching dropoffs. Request `i` is the pair `(i, i + n)`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::EPS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: vertex count {count} in header is odd")]
    OddVertexCount { line: usize, count: usize },
    #[error("expected {expected} vertex lines (depot included), found {found}")]
    VertexCount { expected: usize, found: usize },
    #[error("line {line}: expected 7 fields `id x y d q e l`, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: field `{field}` is not a number: {token:?}")]
    Number {
        line: usize,
        field: &'static str,
        token: String,
    },
    #[error("line {line}: vertex id {found} out of sequence, expected {expected}")]
    VertexId {
        line: usize,
        expected: usize,
        found: i64,
    },
    #[error("line {line}: load of dropoff {dropoff} does not cancel load of pickup {pickup}")]
    LoadMismatch {
        line: usize,
        pickup: usize,
        dropoff: usize,
    },
    #[error("line {line}: depot must have zero load change")]
    DepotLoad { line: usize },
    #[error("line {line}: time window [{open}, {close}] is inverted")]
    WindowInverted { line: usize, open: f64, close: f64 },
    #[error("{what} must be positive, got {value}")]
    NonPositiveBound { what: &'static str, value: f64 },
    #[error("request {request} is infeasible: tightened window of vertex {vertex} is [{open}, {close}]")]
    InfeasibleRequest {
        request: usize,
        vertex: usize,
        open: f64,
        close: f64,
    },
    #[error("vertex index ({i}, {j}) out of range 0..={max}")]
    IndexOutOfRange { i: usize, j: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub service_duration: f64,
    pub load_change: i32,
    pub window_open: f64,
    pub window_close: f64,
}

impl Vertex {
    pub fn window_width(&self) -> f64 {
        self.window_close - self.window_open
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub index: usize,
    pub pickup: usize,
    pub dropoff: usize,
    pub sort_key: f64,
}

/// Immutable DARP instance with a homogeneous fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    n: usize,
    m: usize,
    capacity: i32,
    route_duration_bound: f64,
    ride_time_bound: f64,
    vertices: Vec<Vertex>,
    travel: Vec<f64>,
}

impl Instance {
    /// Builds an instance from raw parts and computes the travel-time matrix.
    pub fn new(
        name: impl Into<String>,
        m: usize,
        capacity: i32,
        route_duration_bound: f64,
        ride_time_bound: f64,
        vertices: Vec<Vertex>,
    ) -> Result<Self, InstanceError> {
        if capacity <= 0 {
            return Err(InstanceError::NonPositiveBound {
                what: "capacity",
                value: capacity as f64,
            });
        }
        if route_duration_bound <= 0.0 || route_duration_bound.is_nan() {
            return Err(InstanceError::NonPositiveBound {
                what: "route duration bound",
                value: route_duration_bound,
            });
        }
        if ride_time_bound <= 0.0 || ride_time_bound.is_nan() {
            return Err(InstanceError::NonPositiveBound {
                what: "ride time bound",
                value: ride_time_bound,
            });
        }
        if vertices.is_empty() || vertices.len().is_multiple_of(2) {
            return Err(InstanceError::VertexCount {
                expected: 2 * (vertices.len() / 2) + 1,
                found: vertices.len(),
            });
        }
        let n = (vertices.len() - 1) / 2;
        // Line numbers are reported as if the vertices followed a header line.
        if vertices[0].load_change != 0 {
            return Err(InstanceError::DepotLoad { line: 2 });
        }
        for (k, v) in vertices.iter().enumerate() {
            if v.window_open > v.window_close {
                return Err(InstanceError::WindowInverted {
                    line: k + 2,
                    open: v.window_open,
                    close: v.window_close,
                });
            }
        }
        for i in 1..=n {
            if vertices[i + n].load_change != -vertices[i].load_change {
                return Err(InstanceError::LoadMismatch {
                    line: i + n + 2,
                    pickup: i,
                    dropoff: i + n,
                });
            }
        }
        let size = vertices.len();
        let mut travel = vec![0.0; size * size];
        for a in 0..size {
            for b in (a + 1)..size {
                let d = (vertices[a].x - vertices[b].x).hypot(vertices[a].y - vertices[b].y);
                travel[a * size + b] = d;
                travel[b * size + a] = d;
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            capacity,
            route_duration_bound,
            ride_time_bound,
            vertices,
            travel,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn capacity(&self) -> i32 {
        self.capacity
    }

    pub fn route_duration_bound(&self) -> f64 {
        self.route_duration_bound
    }

    pub fn ride_time_bound(&self) -> f64 {
        self.ride_time_bound
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn depot(&self) -> &Vertex {
        &self.vertices[0]
    }

    /// Width of the depot window, used as the planning horizon.
    pub fn horizon(&self) -> f64 {
        self.vertices[0].window_width()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Unchecked matrix lookup for hot loops.
    #[inline]
    pub fn tt(&self, i: usize, j: usize) -> f64 {
        self.travel[i * self.vertices.len() + j]
    }

    pub fn travel_time(&self, i: usize, j: usize) -> Result<f64, InstanceError> {
        let max = self.vertices.len() - 1;
        if i > max || j > max {
            return Err(InstanceError::IndexOutOfRange { i, j, max });
        }
        Ok(self.tt(i, j))
    }

    #[inline]
    pub fn is_pickup(&self, v: usize) -> bool {
        v >= 1 && v <= self.n
    }

    #[inline]
    pub fn is_dropoff(&self, v: usize) -> bool {
        v > self.n && v <= 2 * self.n
    }

    /// Request index owning vertex `v`; `None` for the depot.
    #[inline]
    pub fn request_of(&self, v: usize) -> Option<usize> {
        match v {
            0 => None,
            v if v <= self.n => Some(v),
            v => Some(v - self.n),
        }
    }

    #[inline]
    pub fn dropoff_of(&self, request: usize) -> usize {
        request + self.n
    }

    pub fn request(&self, index: usize) -> Request {
        let pickup = index;
        let dropoff = index + self.n;
        Request {
            index,
            pickup,
            dropoff,
            sort_key: self.vertices[pickup].window_close + self.vertices[dropoff].window_open,
        }
    }

    pub fn requests(&self) -> impl Iterator<Item = Request> + '_ {
        (1..=self.n).map(|i| self.request(i))
    }

    /// Writes the instance back in the benchmark text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            self.m,
            2 * self.n,
            self.route_duration_bound,
            self.capacity,
            self.ride_time_bound
        );
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                v.id, v.x, v.y, v.service_duration, v.load_change, v.window_open, v.window_close
            );
        }
        out
    }

    /// Tightens the unspecified side of every request from its specified side.
    ///
    /// A side is specified when its window is strictly narrower than the depot
    /// window. Requests with both or neither side narrow are left alone.
    pub fn tighten_time_windows(&self) -> Result<Instance, InstanceError> {
        let mut out = self.clone();
        let horizon = self.horizon();
        let ride = self.ride_time_bound;
        for i in 1..=self.n {
            let drop = i + self.n;
            let p = &self.vertices[i];
            let d = &self.vertices[drop];
            let pickup_narrow = p.window_width() < horizon - EPS;
            let dropoff_narrow = d.window_width() < horizon - EPS;
            let direct = self.tt(i, drop);
            let (target, open, close) = match (pickup_narrow, dropoff_narrow) {
                (false, true) => (
                    i,
                    p.window_open
                        .max(d.window_open - ride - p.service_duration),
                    p.window_close
                        .min(d.window_close - direct - p.service_duration),
                ),
                (true, false) => (
                    drop,
                    d.window_open
                        .max(p.window_open + p.service_duration + direct),
                    d.window_close
                        .min(p.window_close + p.service_duration + ride),
                ),
                _ => continue,
            };
            if open > close + EPS {
                return Err(InstanceError::InfeasibleRequest {
                    request: i,
                    vertex: target,
                    open,
                    close,
                });
            }
            let v = &mut out.vertices[target];
            v.window_open = open;
            v.window_close = close.max(open);
        }
        Ok(out)
    }
}

fn parse_num<T: std::str::FromStr>(
    token: &str,
    line: usize,
    field: &'static str,
) -> Result<T, InstanceError> {
    token.parse().map_err(|_| InstanceError::Number {
        line,
        field,
        token: token.to_string(),
    })
}

fn parse_load(token: &str, line: usize) -> Result<i32, InstanceError> {
    let value: f64 = parse_num(token, line, "q")?;
    if value.fract() != 0.0 {
        return Err(InstanceError::Number {
            line,
            field: "q",
            token: token.to_string(),
        });
    }
    Ok(value as i32)
}

/// Parses the standard benchmark format: header `m V T Q L` followed by one
/// `id x y d q e l` line per vertex, depot first.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    parse_named_instance("", text)
}

pub fn parse_named_instance(name: &str, text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(InstanceError::Header {
        line: 1,
        reason: "empty input".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(InstanceError::Header {
            line: hline,
            reason: format!("expected 5 fields `m V T Q L`, found {}", fields.len()),
        });
    }
    let m: usize = parse_num(fields[0], hline, "m")?;
    let count: usize = parse_num(fields[1], hline, "V")?;
    let duration: f64 = parse_num(fields[2], hline, "T")?;
    let capacity = parse_load(fields[3], hline)?;
    let ride: f64 = parse_num(fields[4], hline, "L")?;
    if !count.is_multiple_of(2) {
        return Err(InstanceError::OddVertexCount { line: hline, count });
    }

    let mut vertices = Vec::with_capacity(count + 1);
    let mut lines_of = Vec::with_capacity(count + 1);
    let mut extra = Vec::new();
    for (line, body) in lines {
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 7 {
            return Err(InstanceError::FieldCount {
                line,
                found: f.len(),
            });
        }
        let id: i64 = parse_num(f[0], line, "id")?;
        let vertex = Vertex {
            id: vertices.len(),
            x: parse_num(f[1], line, "x")?,
            y: parse_num(f[2], line, "y")?,
            service_duration: parse_num(f[3], line, "d")?,
            load_change: parse_load(f[4], line)?,
            window_open: parse_num(f[5], line, "e")?,
            window_close: parse_num(f[6], line, "l")?,
        };
        if vertices.len() <= count {
            if id != vertices.len() as i64 {
                return Err(InstanceError::VertexId {
                    line,
                    expected: vertices.len(),
                    found: id,
                });
            }
            vertices.push(vertex);
            lines_of.push(line);
        } else {
            extra.push((line, vertex));
        }
    }

    let duplicate_depot = |v: &Vertex| {
        let depot = &vertices[0];
        v.x == depot.x && v.y == depot.y && v.load_change == 0
    };
    if vertices.len() != count + 1
        || extra.len() > 1
        || extra.iter().any(|(_, v)| !duplicate_depot(v))
    {
        return Err(InstanceError::VertexCount {
            expected: count + 1,
            found: vertices.len() + extra.len(),
        });
    }

    Instance::new(name, m, capacity, duration, ride, vertices).map_err(|e| match e {
        // Rewrite vertex-relative line numbers into file line numbers.
        InstanceError::DepotLoad { .. } => InstanceError::DepotLoad { line: lines_of[0] },
        InstanceError::WindowInverted { line, open, close } => InstanceError::WindowInverted {
            line: lines_of[line - 2],
            open,
            close,
        },
        InstanceError::LoadMismatch {
            line,
            pickup,
            dropoff,
        } => InstanceError::LoadMismatch {
            line: lines_of[line - 2],
            pickup,
            dropoff,
        },
        other => other,
    })
}
