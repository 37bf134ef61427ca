//! File headers, number formatting and incomplete-file handling.
//!
//! CSV files start with `# key: value` lines followed by one column header
//! line. JSON files carry the same keys under `metadata`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::{HarnessError, RunContext, VERSION};

pub const UNITS: &str = "energies in Delta_0; times in T_0 = hbar/Delta_0; frequencies in rad/T_0";
pub const PARTIAL_SUFFIX: &str = ".partial";

/// 17 significant digits; `NaN` for missing values.
pub fn fmt_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Finite values as JSON numbers, everything else as `null`.
pub fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Ordered `(key, value)` header entries.
pub fn metadata(command: &str, ctx: &RunContext) -> Vec<(&'static str, String)> {
    let overrides = if ctx.overrides.is_empty() { "none".to_string() } else { ctx.overrides.join(",") };
    vec![
        ("command", command.to_string()),
        ("version", VERSION.to_string()),
        ("config_file", ctx.config_file.as_ref().map_or("<default>".into(), |p| p.display().to_string())),
        ("config_sha256", ctx.config_hash.clone()),
        ("overrides", overrides),
        ("seed", ctx.seed.to_string()),
        ("units", UNITS.to_string()),
    ]
}

pub fn metadata_json(command: &str, ctx: &RunContext) -> Value {
    Value::Object(metadata(command, ctx).into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect())
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(PARTIAL_SUFFIX);
    PathBuf::from(s)
}

/// Streams rows to `<path>.partial` and renames it to `path` on [`finish`](Self::finish).
pub struct CsvSink {
    path: PathBuf,
    partial: PathBuf,
    out: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path, meta: &[(&'static str, String)], columns: &[&str]) -> Result<Self, HarnessError> {
        let partial = partial_path(path);
        let mut out = BufWriter::new(File::create(&partial)?);
        for (k, v) in meta {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { path: path.to_path_buf(), partial, out })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), HarnessError> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf, HarnessError> {
        self.out.flush()?;
        drop(self.out);
        fs::rename(&self.partial, &self.path)?;
        Ok(self.path)
    }
}

/// Writes pretty JSON through a `.partial` file.
pub fn write_json(path: &Path, value: &Value) -> Result<PathBuf, HarnessError> {
    let partial = partial_path(path);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(&partial, text)?;
    fs::rename(&partial, path)?;
    Ok(path.to_path_buf())
}

/// `config_file` and `config_sha256` recorded in an output file.
pub fn recorded_config(path: &Path) -> Result<Option<(String, String)>, HarnessError> {
    let text = fs::read_to_string(path)?;
    let (file, hash) = if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let m = &v["metadata"];
        (m["config_file"].as_str().map(String::from), m["config_sha256"].as_str().map(String::from))
    } else {
        let field = |key: &str| {
            text.lines()
                .take_while(|l| l.starts_with('#'))
                .find_map(|l| l.strip_prefix(&format!("# {key}: ")).map(String::from))
        };
        (field("config_file"), field("config_sha256"))
    };
    Ok(file.zip(hash))
}
