//! Numeric tables and their CSV form.

use std::path::Path;

use crate::error::{Error, Result};

/// Header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let bytes = (|| -> csv::Result<Vec<u8>> {
            writer.write_record(&self.header)?;
            for row in &self.rows {
                writer.write_record(row)?;
            }
            writer.into_inner().map_err(|e| e.into_error().into())
        })()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Parses a numeric column; `None` if the column is missing or a cell is not a number.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|c| c.parse::<f64>().ok())
            .collect()
    }
}

/// Writes `table` to `path` as CSV.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let text = table.to_csv_string()?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    let header = reader
        .headers()
        .map_err(parse_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<csv::Result<_>>()
        .map_err(parse_err)?;
    Ok(Table { header, rows })
}

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!("1.23456789012e-4".parse::<f64>().unwrap(), 1.23456789012e-4);
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(0.1), "3".into()]);
        t.push(vec![num(f64::NEG_INFINITY), "4".into()]);
        emit_csv(&t, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.numeric_column("a").unwrap()[1], f64::NEG_INFINITY);
    }

    #[test]
    fn io_error_names_path() {
        let err = emit_csv(&Table::new(&["a"]), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
