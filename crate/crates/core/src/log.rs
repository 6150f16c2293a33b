//! CSV trajectory logs.

use std::fmt::Write as _;

use crate::dynamics::wrap_angle;
use crate::qp::QpStatus;
use crate::sim::TrajectoryLog;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "t,x,y,theta,u1,u2,delta_d,delta_theta,min_h,qp_status,solve_ms";

/// One parsed CSV line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Wrapped to `(-pi, pi]`.
    pub theta: f64,
    pub u: [f64; 2],
    pub delta: [f64; 2],
    pub min_h: f64,
    pub status: QpStatus,
    pub solve_ms: f64,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a log. With `include_timing = false` the `solve_ms` column is
/// written as zero so that repeated runs produce identical files.
pub fn to_csv(log: &TrajectoryLog, include_timing: bool) -> String {
    let mut out = String::with_capacity(256 * (log.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &log.records {
        let ms = if include_timing { r.solve_time * 1e3 } else { 0.0 };
        let fields = [
            num(r.t),
            num(r.state.x),
            num(r.state.y),
            num(wrap_angle(r.state.theta)),
            num(r.u.0[0]),
            num(r.u.0[1]),
            num(r.delta[0]),
            num(r.delta[1]),
            num(r.min_h),
            r.status.as_str().to_string(),
            num(ms),
        ];
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Parse a log written by [`to_csv`]. Row numbers in errors are 1-based
/// file lines.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Csv {
        row: 1,
        reason: "empty file".into(),
    })?;
    if header.trim() != CSV_HEADER {
        return Err(Error::Csv {
            row: 1,
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(Error::Csv {
                row,
                reason: format!("expected 11 columns, found {}", cols.len()),
            });
        }
        let f = |k: usize| -> Result<f64> {
            cols[k].trim().parse::<f64>().map_err(|_| Error::Csv {
                row,
                reason: format!("column {k} ({:?}) is not a number", cols[k]),
            })
        };
        let status = QpStatus::parse(cols[9].trim()).ok_or_else(|| Error::Csv {
            row,
            reason: format!("unknown qp_status {:?}", cols[9]),
        })?;
        rows.push(CsvRow {
            t: f(0)?,
            x: f(1)?,
            y: f(2)?,
            theta: f(3)?,
            u: [f(4)?, f(5)?],
            delta: [f(6)?, f(7)?],
            min_h: f(8)?,
            status,
            solve_ms: f(10)?,
        });
    }
    Ok(rows)
}
