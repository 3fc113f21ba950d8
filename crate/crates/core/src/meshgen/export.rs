//! Grid export: JSON for tooling, plain text blocks for solver decks.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{cell_counts, Grid};

/// JSON grid document. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub x_lines: Vec<f64>,
    pub y_lines: Vec<f64>,
    pub z_lines: Vec<f64>,
    pub dt_max: f64,
    pub lambda_min: f64,
    pub cells: [u64; 4],
}

impl From<&Grid> for GridDocument {
    fn from(grid: &Grid) -> Self {
        let counts = cell_counts(grid);
        Self {
            x_lines: grid.x.lines.clone(),
            y_lines: grid.y.lines.clone(),
            z_lines: grid.z.lines.clone(),
            dt_max: grid.dt_max,
            lambda_min: grid.lambda_min,
            cells: [counts.nx, counts.ny, counts.nz, counts.total],
        }
    }
}

pub fn to_json(grid: &Grid) -> String {
    let mut out = serde_json::to_string(&GridDocument::from(grid)).expect("grid serialization");
    out.push('\n');
    out
}

pub fn to_text(grid: &Grid) -> String {
    let mut out = String::new();
    for (name, axis) in [("X", &grid.x), ("Y", &grid.y), ("Z", &grid.z)] {
        out.push_str(name);
        out.push('\n');
        for x in &axis.lines {
            writeln!(out, "{x}").unwrap();
        }
    }
    out
}
