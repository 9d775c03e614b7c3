//! Observables along a trajectory and their CSV form.
//!
//! One row per time point: `time`, the eight populations (ground, then
//! sites 1..7) and the seven site–ground coherence magnitudes
//! `|rho_{site j, ground}|`. Numbers are written with 17 significant digits,
//! which round-trips every `f64` exactly.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const LEVELS: usize = 8;
pub const SITES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub populations: [f64; LEVELS],
    pub coherences: [f64; SITES],
}

impl TrajectoryRow {
    pub fn from_state(rho: &ComplexMatrix) -> Self {
        let mut populations = [0.0; LEVELS];
        let mut coherences = [0.0; SITES];
        for (i, p) in populations.iter_mut().enumerate() {
            *p = rho[(i, i)].re;
        }
        for (j, coh) in coherences.iter_mut().enumerate() {
            *coh = rho[(j + 1, 0)].norm();
        }
        Self {
            populations,
            coherences,
        }
    }

    /// Largest absolute difference over all fields.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.populations
            .iter()
            .zip(&other.populations)
            .chain(self.coherences.iter().zip(&other.coherences))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub rows: Vec<TrajectoryRow>,
}

pub fn csv_header() -> String {
    let mut cols = vec!["time".to_string(), "p_ground".to_string()];
    cols.extend((1..=SITES).map(|j| format!("p_site{j}")));
    cols.extend((1..=SITES).map(|j| format!("coh_{j}")));
    cols.join(",")
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(csv_header().split(',')).expect("in-memory write");
        for (t, row) in self.times.iter().zip(&self.rows) {
            let fields = std::iter::once(t)
                .chain(&row.populations)
                .chain(&row.coherences)
                .map(|v| fmt17(*v));
            w.write_record(fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let header = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != csv_header() {
            return Err(parse_err(1, format!("unexpected header {header:?}")));
        }
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let values = record
                .iter()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| parse_err(line, e.to_string()))?;
            if values.len() != 1 + LEVELS + SITES {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, found {}", 1 + LEVELS + SITES, values.len()),
                ));
            }
            times.push(values[0]);
            let mut populations = [0.0; LEVELS];
            populations.copy_from_slice(&values[1..1 + LEVELS]);
            let mut coherences = [0.0; SITES];
            coherences.copy_from_slice(&values[1 + LEVELS..]);
            rows.push(TrajectoryRow {
                populations,
                coherences,
            });
        }
        Ok(Self { times, rows })
    }

    /// Largest row-wise discrepancy between two trajectories on the same grid.
    pub fn max_discrepancy(&self, other: &Self) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .fold(0.0_f64, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}
