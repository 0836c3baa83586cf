//! Tabular artifacts and their metadata sidecars.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Table {
        Table { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Finite floats as numbers, anything else as null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(t: &Table, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r.iter().map(cell))?;
            }
            w.into_inner().map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))
        }
        Format::Json => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Object(t.header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect::<Map<_, _>>()))
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts under one directory, each with a `.meta.json` sidecar
/// holding the experiment spec and the artifact hash.
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    pub spec: Value,
}

impl Output {
    pub fn new(dir: &Path, format: Format, spec: Value) -> io::Result<Output> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), format, spec })
    }

    fn emit(&self, file: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.dir.join(file);
        fs::write(&path, bytes)?;
        let meta = json!({
            "artifact": file,
            "sha256": sha256_hex(bytes),
            "version": env!("CARGO_PKG_VERSION"),
            "spec": self.spec,
        });
        let mut m = serde_json::to_vec_pretty(&meta)?;
        m.push(b'\n');
        fs::write(self.dir.join(format!("{file}.meta.json")), m)?;
        Ok(path)
    }

    pub fn table(&self, t: &Table) -> io::Result<PathBuf> {
        let bytes = render(t, self.format)?;
        self.emit(&format!("{}.{}", t.name, self.format.ext()), &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_leaves_null_cells_empty() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![num(1.5), num(f64::NAN)]);
        t.push(vec![json!("x"), json!(3)]);
        let s = String::from_utf8(render(&t, Format::Csv).unwrap()).unwrap();
        assert_eq!(s, "a,b\n1.5,\nx,3\n");
    }

    #[test]
    fn json_rows_are_keyed_by_header() {
        let mut t = Table::new("t", &["a"]);
        t.push(vec![json!(2)]);
        let v: Value = serde_json::from_slice(&render(&t, Format::Json).unwrap()).unwrap();
        assert_eq!(v, json!([{"a": 2}]));
    }
}
