//! Tick-log serialization.
//!
//! The CSV column contract is fixed: `t`, the leader block
//! `leader.{px,py,pz,psi,unorm}`, then one block per follower `f{i}` (one
//! based) with columns `L,phi,xi,alpha` (measured state), `Ld,phid,xid,
//! alphad` (desired state), `hx1..hx6` (barrier values in face order near,
//! far, ymin, ymax, zmin, zmax), `minh`, `unom0..unom3`, `usafe0..usafe3`,
//! `z1..z6` (slacks), `interv` (0/1), and `qpstat`.
//!
//! Floats are written with 17 significant digits so parsing the file back
//! reproduces every bit. A follower whose trace has ended writes NaN in its
//! numeric columns and qpstat 4.
//!
//! qpstat codes: 0 optimal, 1 iteration limit, 2 infeasible (clamped
//! fallback), 3 filter disabled, 4 trace terminated.

use lff3d::{QpStatus, SimLog};
use std::fmt::Write as _;

pub const QPSTAT_OPTIMAL: i64 = 0;
pub const QPSTAT_MAX_ITERATIONS: i64 = 1;
pub const QPSTAT_INFEASIBLE: i64 = 2;
pub const QPSTAT_DISABLED: i64 = 3;
pub const QPSTAT_TERMINATED: i64 = 4;

pub fn qpstat_code(status: Option<QpStatus>) -> i64 {
    match status {
        Some(QpStatus::Optimal) => QPSTAT_OPTIMAL,
        Some(QpStatus::MaxIterations) => QPSTAT_MAX_ITERATIONS,
        Some(QpStatus::Infeasible) => QPSTAT_INFEASIBLE,
        None => QPSTAT_DISABLED,
    }
}

/// Per-follower column names, in order, without the `f{i}.` prefix.
pub const FOLLOWER_COLUMNS: [&str; 31] = [
    "L", "phi", "xi", "alpha", "Ld", "phid", "xid", "alphad", "hx1", "hx2", "hx3", "hx4", "hx5",
    "hx6", "minh", "unom0", "unom1", "unom2", "unom3", "usafe0", "usafe1", "usafe2", "usafe3",
    "z1", "z2", "z3", "z4", "z5", "z6", "interv", "qpstat",
];

pub fn header(follower_count: usize) -> String {
    let mut names = vec![
        "t".to_string(),
        "leader.px".to_string(),
        "leader.py".to_string(),
        "leader.pz".to_string(),
        "leader.psi".to_string(),
        "leader.unorm".to_string(),
    ];
    for i in 1..=follower_count {
        for col in FOLLOWER_COLUMNS {
            names.push(format!("f{i}.{col}"));
        }
    }
    names.join(",")
}

fn push_float(line: &mut String, v: f64) {
    write!(line, ",{v:.16e}").expect("write to string");
}

/// Renders the complete log as CSV text (header plus one line per tick).
pub fn render(log: &SimLog) -> String {
    let mut out = header(log.follower_count);
    out.push('\n');
    for tick in &log.ticks {
        let mut line = format!("{:.16e}", tick.t);
        push_float(&mut line, tick.leader_pose.position.x);
        push_float(&mut line, tick.leader_pose.position.y);
        push_float(&mut line, tick.leader_pose.position.z);
        push_float(&mut line, tick.leader_pose.yaw);
        push_float(&mut line, tick.leader_command_norm);
        for follower in &tick.followers {
            match follower {
                Some(r) => {
                    for v in [
                        r.state.range,
                        r.state.azimuth,
                        r.state.elevation,
                        r.state.heading,
                        r.desired.range,
                        r.desired.azimuth,
                        r.desired.elevation,
                        r.desired.heading,
                    ] {
                        push_float(&mut line, v);
                    }
                    for v in r.barriers.h {
                        push_float(&mut line, v);
                    }
                    push_float(&mut line, r.min_barrier);
                    for v in [r.u_nom.vx, r.u_nom.vy, r.u_nom.vz, r.u_nom.yaw_rate] {
                        push_float(&mut line, v);
                    }
                    for v in [r.u_safe.vx, r.u_safe.vy, r.u_safe.vz, r.u_safe.yaw_rate] {
                        push_float(&mut line, v);
                    }
                    for v in r.slacks {
                        push_float(&mut line, v);
                    }
                    write!(line, ",{}", i64::from(r.intervention)).expect("write to string");
                    write!(line, ",{}", qpstat_code(r.qp_status)).expect("write to string");
                }
                None => {
                    for _ in 0..29 {
                        line.push_str(",NaN");
                    }
                    write!(line, ",0,{QPSTAT_TERMINATED}").expect("write to string");
                }
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// A log read back from CSV: header names plus all cells as floats
/// (`interv` and `qpstat` parse losslessly into f64).
#[derive(Debug, Clone)]
pub struct ParsedLog {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(thiserror::Error, Debug)]
pub enum LogReadError {
    #[error("log is empty")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: unparseable number {text:?}")]
    BadNumber { line: usize, column: String, text: String },
    #[error("column {0} missing from header")]
    MissingColumn(String),
}

impl ParsedLog {
    pub fn parse(text: &str) -> Result<ParsedLog, LogReadError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(LogReadError::Empty)?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(LogReadError::Ragged {
                    line: idx + 2,
                    expected: columns.len(),
                    found: cells.len(),
                });
            }
            let mut row = Vec::with_capacity(cells.len());
            for (c, cell) in cells.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| LogReadError::BadNumber {
                    line: idx + 2,
                    column: columns[c].clone(),
                    text: cell.to_string(),
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(LogReadError::Empty);
        }
        Ok(ParsedLog { columns, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize, LogReadError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LogReadError::MissingColumn(name.to_string()))
    }

    pub fn follower_count(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.ends_with(".qpstat"))
            .count()
    }

    /// All values of one column, in tick order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>, LogReadError> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}
