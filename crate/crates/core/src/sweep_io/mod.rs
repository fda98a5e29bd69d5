//! Parameter sweeps over the simulation targets, with CSV, JSON-metadata and
//! SVG heatmap output.

pub mod job;
pub mod run;
pub mod svg;
pub mod table;

use thiserror::Error;

pub use job::{Axis, AxisName, FixedParams, ModelKind, Spacing, SweepJob, Target};
pub use run::{run_sweep, run_sweep_with};
pub use svg::{emit_heatmap_svg, heatmap_svg};
pub use table::{emit_csv, meta_path, Cell, Column, ColumnKind, ResultTable};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("table is not a complete grid: {0}")]
    NonGrid(String),
    #[error("no column named {0:?}")]
    UnknownColumn(String),
}
