//! Tables, JSON documents and atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Column-major numeric table; the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// `{"columns": [...], "<col>": [...], ...}` keeps the column order.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("columns".into(), serde_json::json!(self.columns));
        for (i, name) in self.columns.iter().enumerate() {
            map.insert(name.clone(), serde_json::json!(self.column(i)));
        }
        serde_json::Value::Object(map)
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty CSV")?;
        let mut table = Table::new(header.split(','));
        for (k, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| format!("line {}: {e}", k + 2))?;
            if row.len() != table.columns.len() {
                return Err(format!("line {}: expected {} fields", k + 2, table.columns.len()));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// `{"nu": [...], "p": [...]}`.
pub fn distribution_json(p: &[f64]) -> serde_json::Value {
    serde_json::json!({
        "nu": (0..p.len()).collect::<Vec<_>>(),
        "p": p,
    })
}

/// Non-finite floats become `null` in JSON; keep them readable instead.
pub fn finite_or_string(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(v.to_string())
    }
}

/// Nested objects become `parent_child` keys; arrays are kept as they are.
pub fn flatten(value: &serde_json::Value) -> serde_json::Value {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut serde_json::Map<String, serde_json::Value>) {
        match v {
            serde_json::Value::Object(map) if !map.is_empty() => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}_{k}") };
                    walk(&key, v, out);
                }
            }
            _ => {
                out.insert(prefix.to_string(), v.clone());
            }
        }
    }
    let mut out = serde_json::Map::new();
    walk("", value, &mut out);
    serde_json::Value::Object(out)
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path.file_name().ok_or_else(|| CliError::Io(format!("bad output path {}", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(["t_s", "P_up"]);
        t.push(vec![0.0, 1.0]);
        t.push(vec![1.234_567_890_123_456_7e-12, 0.1 + 0.2]);
        let csv = t.to_csv();
        assert!(csv.starts_with("t_s,P_up\n"));
        assert!(!csv.contains('\r'));
        assert_eq!(Table::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn flatten_joins_keys() {
        let v = serde_json::json!({"a": {"b": 1, "c": {"d": [1, 2]}}, "e": null});
        assert_eq!(flatten(&v), serde_json::json!({"a_b": 1, "a_c_d": [1, 2], "e": null}));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
