//! Table serialisation. CSV files open with `#`-prefixed metadata lines, then
//! a header row; JSON files hold `{metadata, columns, rows}`. Floats are
//! written with 17 significant digits so they round-trip exactly.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

impl From<stoc::SweepTable> for Table {
    fn from(t: stoc::SweepTable) -> Self {
        Table {
            columns: t.columns,
            rows: t.rows,
        }
    }
}

/// Ordered key/value pairs describing how a table was produced.
pub type Metadata = Vec<(String, String)>;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render(table: &Table, metadata: &Metadata, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => render_csv(table, metadata),
        Format::Json => render_json(table, metadata),
    }
}

fn render_csv(table: &Table, metadata: &Metadata) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for (k, v) in metadata {
        writeln!(buf, "# {k}: {v}").expect("write to Vec");
    }
    let mut w = csv::Writer::from_writer(buf);
    let fail = |e: csv::Error| CliError::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e.to_string()),
    };
    w.write_record(&table.columns).map_err(fail)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_float(x))).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e.to_string()),
    })
}

fn render_json(table: &Table, metadata: &Metadata) -> Result<Vec<u8>, CliError> {
    let meta: serde_json::Map<String, serde_json::Value> = metadata
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    let doc = serde_json::json!({
        "metadata": meta,
        "columns": table.columns,
        "rows": table.rows,
    });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io {
        path: "<json buffer>".into(),
        source: std::io::Error::other(e),
    })?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Table, Metadata) {
        let t = Table::new(&["x", "y"], vec![vec![0.1, 1.0 / 3.0], vec![0.2, -2e-300]]);
        let m = vec![("tool".to_string(), "stoc 0.1.0".to_string())];
        (t, m)
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let (t, m) = sample();
        let text = String::from_utf8(render(&t, &m, Format::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# tool: stoc 0.1.0"));
        assert_eq!(lines.next(), Some("x,y"));
        let values: Vec<f64> = lines
            .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        assert_eq!(values, vec![0.1, 1.0 / 3.0, 0.2, -2e-300]);
    }

    #[test]
    fn json_layout() {
        let (t, m) = sample();
        let v: serde_json::Value = serde_json::from_slice(&render(&t, &m, Format::Json).unwrap()).unwrap();
        assert_eq!(v["columns"][1], "y");
        assert_eq!(v["rows"][0][1].as_f64(), Some(1.0 / 3.0));
        assert_eq!(v["metadata"]["tool"], "stoc 0.1.0");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
