//! Numeric result tables and their two text formats.
//!
//! CSV: `# key: value` metadata lines, a header row, then comma-separated
//! rows. Plot: the same metadata, `# columns: a b c`, then
//! whitespace-separated rows (gnuplot reads it directly). Values are
//! written with 17 significant digits so they parse back bit-exactly.
//! A metadata value spanning several lines is written as one `# key:` line
//! per line and joined again on reading.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::Format;
use crate::error::{CliError, CliResult};

const COLUMNS_KEY: &str = "columns";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    metadata: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TableParseError {
    pub line: usize,
    pub message: String,
}

fn value(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Values of one named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Appends a row; panics if its length differs from the column count,
    /// which would be a bug in the caller.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(row);
    }

    pub fn take_metadata(&mut self) -> Vec<(String, String)> {
        std::mem::take(&mut self.metadata)
    }

    /// Sets a metadata entry, replacing an earlier one with the same key.
    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        assert!(
            !key.is_empty() && key != COLUMNS_KEY && !key.contains([':', '\n', ' ']),
            "bad metadata key `{key}`"
        );
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for line in v.split('\n') {
                let _ = writeln!(out, "# {k}: {line}");
            }
        }
        let sep = match format {
            Format::Csv => {
                let _ = writeln!(out, "{}", self.columns.join(","));
                ","
            }
            Format::Plot => {
                let _ = writeln!(out, "# {COLUMNS_KEY}: {}", self.columns.join(" "));
                " "
            }
        };
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| value(x)).collect();
            let _ = writeln!(out, "{}", cells.join(sep));
        }
        out
    }

    /// Reads either format back.
    pub fn parse(text: &str) -> Result<Self, TableParseError> {
        let err = |line: usize, message: String| TableParseError { line, message };
        let mut metadata: Vec<(String, String)> = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut plot = false;
        let mut rows = Vec::new();
        let mut last_key: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(rest) = line.strip_prefix("# ") {
                if !rows.is_empty() || (columns.is_some() && !plot) {
                    return Err(err(n, "metadata after the header".into()));
                }
                let (k, v) = rest
                    .split_once(": ")
                    .or_else(|| rest.strip_suffix(':').map(|k| (k, "")))
                    .ok_or_else(|| err(n, format!("expected `# key: value`, got `{line}`")))?;
                if k == COLUMNS_KEY {
                    columns = Some(v.split_whitespace().map(String::from).collect());
                    plot = true;
                } else if last_key.as_deref() == Some(k) {
                    let slot = metadata.last_mut().expect("previous key");
                    slot.1.push('\n');
                    slot.1.push_str(v);
                } else {
                    metadata.push((k.to_string(), v.to_string()));
                    last_key = Some(k.to_string());
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let Some(cols) = &columns else {
                columns = Some(line.split(',').map(String::from).collect());
                continue;
            };
            let cells: Vec<&str> = if plot {
                line.split_whitespace().collect()
            } else {
                line.split(',').collect()
            };
            if cells.len() != cols.len() {
                return Err(err(n, format!("{} values for {} columns", cells.len(), cols.len())));
            }
            let row = cells
                .iter()
                .map(|c| c.trim().parse::<f64>().map_err(|e| err(n, format!("`{c}`: {e}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        let columns = columns.ok_or_else(|| err(text.lines().count(), "no header".into()))?;
        Ok(Self {
            columns,
            rows,
            metadata,
        })
    }

    /// Writes the table to `path`, creating parent directories.
    pub fn write(&self, path: &Path, format: Format) -> CliResult<()> {
        let io = |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        std::fs::write(path, self.render(format)).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(["x", "y"]);
        t.set_meta("tool", "latgate");
        t.set_meta("config", "kind = \"gate\"\n\n[model]\nsites = 2");
        t.push(vec![0.1, -1.0 / 3.0]);
        t.push(vec![f64::MIN_POSITIVE, 1e300]);
        t.push(vec![f64::NAN, -0.0]);
        t
    }

    fn same(a: &ResultTable, b: &ResultTable) {
        assert_eq!(a.columns, b.columns);
        assert_eq!(a.metadata, b.metadata);
        let bits = |t: &ResultTable| -> Vec<u64> { t.rows.iter().flatten().map(|x| x.to_bits()).collect() };
        assert_eq!(bits(a), bits(b));
    }

    #[test]
    fn both_formats_round_trip() {
        let t = sample();
        for f in [Format::Csv, Format::Plot] {
            let back = ResultTable::parse(&t.render(f)).unwrap();
            same(&t, &back);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(["a", "b"]);
        t.set_meta("k", "v");
        t.push(vec![1.0, 0.5]);
        assert_eq!(t.render(Format::Csv), "# k: v\na,b\n1.0000000000000000e0,5.0000000000000000e-1\n");
        assert_eq!(
            t.render(Format::Plot),
            "# k: v\n# columns: a b\n1.0000000000000000e0 5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let e = ResultTable::parse("a,b\n1,2\n3\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn meta_replaces() {
        let mut t = ResultTable::new(["a"]);
        t.set_meta("k", "1");
        t.set_meta("k", "2");
        assert_eq!(t.metadata(), &[("k".to_string(), "2".to_string())]);
    }
}
