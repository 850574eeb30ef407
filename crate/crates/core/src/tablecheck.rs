//! Consistency audit of published diversity tables: each cell's reported
//! cultural diversity should match mean quality times mean size-normalized
//! Vendi score up to two-decimal rounding.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::concept::Concept;
use crate::kernels::KernelPreset;

/// Allowed `|q * vs_bar - cd|`, covering rounding of all three published values.
pub const TABLE_TOLERANCE: f64 = 0.011;

const SHIPPED: &str = include_str!("../data/published_tables.csv");

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate cell {model}/{concept}/{kernel}")]
    Duplicate {
        model: String,
        concept: Concept,
        kernel: KernelPreset,
    },
    #[error("table has no cells")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub model: String,
    pub concept: Concept,
    pub kernel: KernelPreset,
    pub q: f64,
    pub vs_bar: f64,
    pub cd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    #[serde(flatten)]
    pub cell: TableCell,
    pub product: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheckReport {
    pub tolerance: f64,
    pub cells: Vec<CellCheck>,
    pub max_residual: f64,
}

impl TableCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

/// Parses `model,concept,kernel,q,vs_bar,cd` rows; `#` lines are comments.
pub fn parse_table(text: &str) -> Result<Vec<TableCell>, TableError> {
    let mut cells: Vec<TableCell> = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !header_seen {
            if fields != ["model", "concept", "kernel", "q", "vs_bar", "cd"] {
                return Err(TableError::Malformed {
                    line,
                    message: "expected header `model,concept,kernel,q,vs_bar,cd`".into(),
                });
            }
            header_seen = true;
            continue;
        }
        let bad = |message: String| TableError::Malformed { line, message };
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let num = |i: usize, name: &str| -> Result<f64, TableError> {
            let v: f64 = fields[i]
                .parse()
                .map_err(|_| bad(format!("{name} `{}` is not a number", fields[i])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("{name} {v} outside [0, 1]")));
            }
            Ok(v)
        };
        let cell = TableCell {
            model: fields[0].to_string(),
            concept: fields[1].parse().map_err(|e| bad(format!("{e}")))?,
            kernel: fields[2].parse().map_err(|e| bad(format!("{e}")))?,
            q: num(3, "q")?,
            vs_bar: num(4, "vs_bar")?,
            cd: num(5, "cd")?,
        };
        if cells
            .iter()
            .any(|c| c.model == cell.model && c.concept == cell.concept && c.kernel == cell.kernel)
        {
            return Err(TableError::Duplicate {
                model: cell.model,
                concept: cell.concept,
                kernel: cell.kernel,
            });
        }
        cells.push(cell);
    }
    if cells.is_empty() {
        return Err(TableError::Empty);
    }
    Ok(cells)
}

pub fn read_table<R: Read>(mut reader: R) -> Result<Vec<TableCell>, TableError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_table(&text)
}

/// The published 60-cell table bundled with the crate.
pub fn shipped_table() -> Vec<TableCell> {
    parse_table(SHIPPED).expect("bundled table parses")
}

pub fn shipped_table_text() -> &'static str {
    SHIPPED
}

pub fn check_table(cells: &[TableCell], tolerance: f64) -> TableCheckReport {
    let mut max_residual: f64 = 0.0;
    let checks = cells
        .iter()
        .map(|cell| {
            let product = cell.q * cell.vs_bar;
            let residual = (product - cell.cd).abs();
            max_residual = max_residual.max(residual);
            CellCheck {
                cell: cell.clone(),
                product,
                residual,
                pass: residual <= tolerance,
            }
        })
        .collect();
    TableCheckReport {
        tolerance,
        cells: checks,
        max_residual,
    }
}
