//! Report files and the JSON summary shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use tmss_core::wfa::{fmt_float, fmt_scaled};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number with at most twelve significant digits; non-finite values become
/// the strings `inf`, `-inf` or `nan`.
pub fn float(x: f64) -> Value {
    let s = fmt_float(x);
    match s.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
        Some(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(s),
    }
}

pub fn cost(value: i64, scale: i64) -> Value {
    float(value as f64 / scale as f64)
}

pub fn exact(value: i64, scale: i64) -> Value {
    Value::String(fmt_scaled(value, scale))
}

/// Ordered-key summary document. `online_cost`, `offline_cost`, `ratio`,
/// `rounds`, `seed`, `parameters` and `version` are always present.
pub struct Summary {
    fields: Map<String, Value>,
}

impl Summary {
    pub fn new(command: &str, seed: Option<u64>, parameters: Value) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("version".into(), json!(VERSION));
        fields.insert("seed".into(), json!(seed));
        fields.insert("parameters".into(), parameters);
        for k in ["online_cost", "offline_cost", "ratio", "rounds"] {
            fields.insert(k.into(), Value::Null);
        }
        Summary { fields }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    /// Sets `online_cost`, `offline_cost` (scaled integers) and `ratio`.
    pub fn costs(&mut self, online: i64, offline: i64, scale: i64, ratio: f64) -> &mut Self {
        self.set("online_cost", cost(online, scale))
            .set("offline_cost", cost(offline, scale))
            .set("online_cost_exact", exact(online, scale))
            .set("offline_cost_exact", exact(offline, scale))
            .set("ratio", float(ratio))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("serializable") + "\n"
    }
}

/// Builds a CSV document with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Where report files go. Without a directory only the summary is printed.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Output { dir: dir.map(Path::to_path_buf) })
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }

    pub fn finish(&self, summary: &Summary) -> Result<(), CliError> {
        let text = summary.to_json();
        self.write("summary.json", &text)?;
        print!("{text}");
        Ok(())
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
