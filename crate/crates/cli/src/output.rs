use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use orbit_census::Result;

pub const SCHEMA: &str = "orbit-census v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One output file: parameter header plus a table.
pub struct Artifact {
    pub stem: String,
    pub params: Vec<(String, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Top-level JSON fields that replace `rows`.
    pub json: Option<Map<String, Value>>,
}

impl Artifact {
    pub fn new(stem: String, columns: &[&'static str]) -> Self {
        Artifact {
            stem,
            params: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            json: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.push((key.to_string(), value.into()));
    }

    pub fn row(&mut self, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.stem, format.extension()));
        let mut out = BufWriter::new(File::create(&path)?);
        match format {
            Format::Csv => self.write_csv(&mut out)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.json_document())?;
                out.write_all(b"\n")?;
            }
        }
        out.flush()?;
        Ok(path)
    }

    fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "# {SCHEMA}")?;
        for (k, v) in &self.params {
            writeln!(out, "# {k}={}", cell(v))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }

    fn json_document(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().cloned().collect();
        if let Some(extra) = &self.json {
            let mut doc = Map::new();
            doc.insert("schema".into(), json!(SCHEMA));
            doc.insert("params".into(), Value::Object(params));
            doc.extend(extra.clone());
            return Value::Object(doc);
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.clone()))
                        .collect(),
                )
            })
            .collect();
        json!({ "schema": SCHEMA, "params": params, "rows": rows })
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A float cell; non-finite values become `null` / empty.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
