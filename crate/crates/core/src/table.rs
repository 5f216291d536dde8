//! Versioned CSV tables.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_VERSION_LINE: &str = "# fockprep-csv v1";

/// Fifteen significant digits, `.` decimal separator.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.14e}")
    }
}

pub fn optional_real(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), real)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_VERSION_LINE}")?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        self.write(std::io::BufWriter::new(file)).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![real(0.1), optional_real(None)]);
        let s = t.to_csv_string();
        assert_eq!(s, "# fockprep-csv v1\na,b\n1.00000000000000e-1,NaN\n");
        let parsed: f64 = "1.00000000000000e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }
}
