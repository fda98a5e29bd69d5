//! Typed result tables and their CSV serialization.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::SweepError;
use crate::operator::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Real,
    Complex,
    Int,
    Bool,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(C64),
    Int(i64),
    Bool(bool),
    Text(String),
    /// Value not available because the row failed.
    Missing,
}

impl Cell {
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Cell::Real(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: serde_json::Value,
}

pub const ERROR_COLUMN: &str = "error";

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Real (or integer) values of column `name`; missing cells become NaN.
    pub fn real_column(&self, name: &str) -> Result<Vec<f64>, SweepError> {
        let idx = self.column_index(name).ok_or_else(|| SweepError::UnknownColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[idx].as_real().unwrap_or(f64::NAN)).collect())
    }

    /// Indices of rows with a non-empty error cell.
    pub fn failed_rows(&self) -> Vec<usize> {
        let Some(idx) = self.column_index(ERROR_COLUMN) else { return Vec::new() };
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(&r[idx], Cell::Text(t) if !t.is_empty()))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.columns {
            match c.kind {
                ColumnKind::Complex => {
                    out.push(format!("{}_re", c.name));
                    out.push(format!("{}_im", c.name));
                }
                _ => out.push(c.name.clone()),
            }
        }
        out
    }

    fn render_row(&self, row: &[Cell]) -> Vec<String> {
        let mut out = Vec::new();
        for (col, cell) in self.columns.iter().zip(row) {
            match (col.kind, cell) {
                (ColumnKind::Complex, Cell::Complex(z)) => {
                    out.push(fmt_real(z.re));
                    out.push(fmt_real(z.im));
                }
                (ColumnKind::Complex, _) => {
                    out.push(String::new());
                    out.push(String::new());
                }
                (_, Cell::Real(x)) => out.push(fmt_real(*x)),
                (_, Cell::Int(i)) => out.push(i.to_string()),
                (_, Cell::Bool(b)) => out.push(b.to_string()),
                (_, Cell::Text(t)) => out.push(t.clone()),
                (_, Cell::Complex(z)) => out.push(format!("{}{:+}i", fmt_real(z.re), z.im)),
                (_, Cell::Missing) => out.push(String::new()),
            }
        }
        out
    }

    /// CSV text with a header row.
    pub fn to_csv_string(&self) -> Result<String, SweepError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in &self.rows {
            w.write_record(self.render_row(row))?;
        }
        let bytes = w.into_inner().map_err(|e| SweepError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

/// Sidecar path `<dir>/<stem>.meta.json` for an output file.
pub fn meta_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

/// Writes the table as CSV to `path` and its metadata next to it.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), SweepError> {
    std::fs::write(path, table.to_csv_string()?)?;
    let meta = serde_json::to_string_pretty(&table.metadata)?;
    std::fs::write(meta_path(path), meta + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ResultTable {
        ResultTable {
            columns: vec![
                Column::new("gamma", ColumnKind::Real),
                Column::new("E1", ColumnKind::Complex),
                Column::new(ERROR_COLUMN, ColumnKind::Text),
            ],
            rows: vec![
                vec![Cell::Real(0.1), Cell::Complex(C64::new(-0.5, 0.25)), Cell::Text(String::new())],
                vec![Cell::Real(0.2), Cell::Missing, Cell::Text("bad, point".into())],
            ],
            metadata: serde_json::json!({"k": 1}),
        }
    }

    #[test]
    fn complex_columns_split() {
        assert_eq!(small().header(), vec!["gamma", "E1_re", "E1_im", "error"]);
    }

    #[test]
    fn csv_shape_and_quoting() {
        let text = small().to_csv_string().unwrap();
        let lines: Vec<&str> = text.split_terminator("\r\n").collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "1.0000000000000001e-1,-5.0000000000000000e-1,2.5000000000000000e-1,");
        assert!(lines[2].ends_with(",,,\"bad, point\""));
        assert_eq!(small().failed_rows(), vec![1]);
    }

    #[test]
    fn emits_file_and_sidecar_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_csv(&small(), &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        emit_csv(&small(), &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        assert!(dir.path().join("out.meta.json").exists());
        assert_eq!(meta_path(Path::new("a/b/fig8a.csv")), PathBuf::from("a/b/fig8a.meta.json"));
    }

    #[test]
    fn real_column_reads_values() {
        assert_eq!(small().real_column("gamma").unwrap(), vec![0.1, 0.2]);
        assert!(small().real_column("nope").is_err());
    }
}
