//! Ratio tables and their CSV / JSON forms.
//!
//! Counts are integers; every derived float is computed once from the final
//! counts, so a table depends only on its inputs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::normal;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "m,k,t,count,total,empirical,survival,ratio,degenerate";

/// `z_{0.975}`.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `count / total` at 95%.
pub fn wilson_interval(count: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = count as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes; avoid rounding residue
    let lo = if count == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if count == total { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// One-sided 95% Clopper–Pearson upper bound for a probability after zero
/// events in `total` trials: `1 - 0.05^{1/N}`.
pub fn zero_count_upper(total: u64) -> f64 {
    -(0.05f64.ln() / total as f64).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub t: f64,
    pub count: u64,
    pub total: u64,
    pub degenerate: u64,
    pub empirical: f64,
    pub survival: f64,
    pub ratio: f64,
    /// Wilson 95% interval for `empirical`.
    pub wilson: (f64, f64),
}

impl Cell {
    pub fn from_counts(t: f64, count: u64, total: u64, degenerate: u64) -> Self {
        let empirical = if total == 0 { f64::NAN } else { count as f64 / total as f64 };
        let survival = normal::survival(t);
        Self {
            t,
            count,
            total,
            degenerate,
            empirical,
            survival,
            ratio: empirical / survival,
            wilson: wilson_interval(count, total),
        }
    }

    /// Wilson interval carried over to the ratio scale.
    pub fn ratio_interval(&self) -> (f64, f64) {
        (self.wilson.0 / self.survival, self.wilson.1 / self.survival)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub label: String,
    pub m: usize,
    pub k: usize,
    pub cells: Vec<Cell>,
}

impl RatioRow {
    pub fn cell(&self, t: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.t == t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CfTable,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub mode: Mode,
    pub n: usize,
    /// Grid range or seed/replicate range the counts come from.
    pub sampling: String,
    pub source: String,
    pub seed: Option<u64>,
    pub mu: Option<f64>,
    pub exponent: Option<f64>,
    pub center: String,
    pub engine_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    /// Absent for tables read back from CSV.
    pub metadata: Option<Metadata>,
    pub rows: Vec<RatioRow>,
}

impl RatioTable {
    pub fn row(&self, m: usize) -> Option<&RatioRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&RatioRow, &Cell)> {
        self.rows.iter().flat_map(|r| r.cells.iter().map(move |c| (r, c)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (1 + self.cells().count()));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (row, c) in self.cells() {
            let _ = writeln!(
                out,
                "{},{},{:?},{},{},{:?},{:?},{:?},{}",
                row.m, row.k, c.t, c.count, c.total, c.empirical, c.survival, c.ratio, c.degenerate
            );
        }
        out
    }

    /// Reads a table written by [`RatioTable::to_csv`]. Derived columns are
    /// recomputed from the counts and checked against the file.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end_matches('\r') == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header {CSV_HEADER:?}, got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut rows: Vec<RatioRow> = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what} in {line:?}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad("field count"));
            }
            let int = |j: usize, what: &str| f[j].parse::<u64>().map_err(|_| bad(what));
            let float = |j: usize, what: &str| f[j].parse::<f64>().map_err(|_| bad(what));
            let m = int(0, "m")? as usize;
            let k = int(1, "k")? as usize;
            let cell = Cell::from_counts(float(2, "t")?, int(3, "count")?, int(4, "total")?, int(8, "degenerate")?);
            let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
            if !same(cell.empirical, float(5, "empirical")?)
                || !same(cell.survival, float(6, "survival")?)
                || !same(cell.ratio, float(7, "ratio")?)
            {
                return Err(bad("derived column (inconsistent with counts)"));
            }
            match rows.last_mut() {
                Some(r) if r.m == m && r.k == k => r.cells.push(cell),
                _ => rows.push(RatioRow {
                    label: format!("m={m}"),
                    m,
                    k,
                    cells: vec![cell],
                }),
            }
        }
        Ok(Self {
            metadata: None,
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }
}
