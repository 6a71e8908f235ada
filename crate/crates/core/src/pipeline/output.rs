use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::sig9;

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_bytes(&bytes))
}

/// Builds a stage input hash from labelled parts.
#[derive(Default)]
pub struct InputHasher(Sha256);

impl InputHasher {
    pub fn new(stage: &str) -> InputHasher {
        let mut h = InputHasher::default();
        h.part("stage", stage.as_bytes());
        h
    }

    pub fn part(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        for chunk in [label.as_bytes(), bytes] {
            self.0.update((chunk.len() as u64).to_le_bytes());
            self.0.update(chunk);
        }
        self
    }

    pub fn file(&mut self, label: &str, path: &Path) -> Result<&mut Self> {
        let h = sha256_file(path)?;
        Ok(self.part(label, h.as_bytes()))
    }

    pub fn json<T: Serialize>(&mut self, label: &str, value: &T) -> Result<&mut Self> {
        let s = serde_json::to_string(value)?;
        Ok(self.part(label, s.as_bytes()))
    }

    pub fn finish(self) -> String {
        hex(&self.0.finalize())
    }
}

/// Rounds every float in a JSON tree to 9 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = sig9(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with floats at 9 significant digits.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

/// Pretty JSON written as is (used for model parameters).
pub fn write_json_exact<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for r in rows {
        let mut v = serde_json::to_value(r)?;
        round_floats(&mut v);
        serde_json::to_writer(&mut buf, &v)?;
        buf.push(b'\n');
    }
    write_bytes(path, &buf)
}

/// CSV with a header row; cells are already formatted strings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    write_bytes(path, &bytes)
}
