//! Convergence trace records and their CSV form.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

pub const TRACE_HEADER: &str =
    "elapsed_ms,iteration,temperature,best_cost,best_served,current_cost,current_served,event";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Construct,
    Improve,
    Restart,
    Reheat,
    Tick,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Construct => "construct",
            TraceEvent::Improve => "improve",
            TraceEvent::Restart => "restart",
            TraceEvent::Reheat => "reheat",
            TraceEvent::Tick => "tick",
        }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "construct" => TraceEvent::Construct,
            "improve" => TraceEvent::Improve,
            "restart" => TraceEvent::Restart,
            "reheat" => TraceEvent::Reheat,
            "tick" => TraceEvent::Tick,
            other => return Err(format!("unknown event {other:?}")),
        })
    }
}

/// One row of convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub elapsed_ms: f64,
    pub iteration: u64,
    pub temperature: f64,
    pub best_cost: Option<f64>,
    pub best_served: usize,
    pub current_cost: f64,
    pub current_served: usize,
    pub event: TraceEvent,
}

impl TraceRecord {
    /// CSV row without the trailing newline.
    pub fn to_csv(&self) -> String {
        let mut row = String::new();
        let _ = write!(row, "{:.3},{},{},", self.elapsed_ms, self.iteration, self.temperature);
        if let Some(c) = self.best_cost {
            let _ = write!(row, "{c}");
        }
        let _ = write!(
            row,
            ",{},{},{},{}",
            self.best_served, self.current_cost, self.current_served, self.event
        );
        row
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("trace line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

pub fn write_trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>, TraceParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => {
            return Err(TraceParseError {
                line: 1,
                reason: "missing header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| TraceParseError {
            line: line_no,
            reason,
        };
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return Err(err(format!("expected 8 columns, found {}", f.len())));
        }
        fn num<T: FromStr>(s: &str, line: usize, col: &str) -> Result<T, TraceParseError> {
            s.parse().map_err(|_| TraceParseError {
                line,
                reason: format!("bad {col} {s:?}"),
            })
        }
        out.push(TraceRecord {
            elapsed_ms: num(f[0], line_no, "elapsed_ms")?,
            iteration: num(f[1], line_no, "iteration")?,
            temperature: num(f[2], line_no, "temperature")?,
            best_cost: if f[3].is_empty() {
                None
            } else {
                Some(num(f[3], line_no, "best_cost")?)
            },
            best_served: num(f[4], line_no, "best_served")?,
            current_cost: num(f[5], line_no, "current_cost")?,
            current_served: num(f[6], line_no, "current_served")?,
            event: f[7].parse().map_err(err)?,
        });
    }
    Ok(out)
}
