//! CSV tables with a `#` provenance header.
//!
//! Numbers are written with 17 significant digits so every value survives a
//! round trip; lines end in `\n`.

use std::fmt::Write as _;
use std::path::Path;

use poro_core::edema::{EdemaReport, SweepRow};
use poro_core::verification::ConvergenceTable;

use crate::error::{AppError, AppResult};
use crate::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(v) => write!(out, "{v:.16e}").unwrap(),
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Text(s) => out.push_str(s),
            Cell::Empty => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Provenance lines, written after `# `.
    pub notes: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            notes: Vec::new(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> AppResult<String> {
        if self.rows.is_empty() {
            return Err(AppError::Input("refusing to write an empty table".into()));
        }
        let mut s = String::new();
        for n in &self.notes {
            for line in n.lines() {
                writeln!(s, "# {line}").unwrap();
            }
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            assert_eq!(row.len(), self.header.len(), "row width differs from header");
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                c.render(&mut s);
            }
            s.push('\n');
        }
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        write_atomic(path, self.render()?.as_bytes())
    }
}

pub const CONVERGENCE_COLUMNS: &[&str] = &[
    "h", "dt", "theta", "uL2", "uL2_order", "uH1", "uH1_order", "pL2", "pL2_order", "pH1", "pH1_order", "seconds",
];

pub const SERIES_COLUMNS: &[&str] = &["t_min", "p_max_Pa", "u_max_mm"];

pub const SWEEP_COLUMNS: &[&str] = &["param", "multiplier", "mu", "inv_lambda", "u_max_mm", "p_max_Pa", "plateau_min"];

/// Orders are blank on the first row.
pub fn convergence_table(t: &ConvergenceTable) -> Table {
    let mut out = Table::new(CONVERGENCE_COLUMNS);
    for (i, r) in t.rows.iter().enumerate() {
        let order = |k: usize| match i.checked_sub(1) {
            Some(j) => Cell::Num(t.orders[j][k]),
            None => Cell::Empty,
        };
        out.rows.push(vec![
            Cell::Num(r.h),
            Cell::Num(r.dt),
            Cell::Int(r.theta as i64),
            Cell::Num(r.u_l2),
            order(0),
            Cell::Num(r.u_h1),
            order(1),
            Cell::Num(r.p_l2),
            order(2),
            Cell::Num(r.p_h1),
            order(3),
            Cell::Num(r.seconds),
        ]);
    }
    out
}

pub fn series_table(r: &EdemaReport) -> Table {
    let mut out = Table::new(SERIES_COLUMNS);
    for i in 0..r.times.len() {
        out.rows
            .push(vec![Cell::Num(r.times[i]), Cell::Num(r.p_max[i]), Cell::Num(r.u_max[i])]);
    }
    out
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut out = Table::new(SWEEP_COLUMNS);
    for r in rows {
        out.rows.push(vec![
            Cell::Text(r.parameter.name().into()),
            Cell::Num(r.value),
            Cell::Num(r.mu),
            Cell::Num(r.inv_lambda),
            Cell::Num(r.u_max),
            Cell::Num(r.p_max),
            Cell::Num(r.plateau_time),
        ]);
    }
    out
}

/// Data rows of a rendered table as `(header, rows)`, skipping `#` lines.
pub fn parse_table(text: &str) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next()?.split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Some((header, rows))
}
