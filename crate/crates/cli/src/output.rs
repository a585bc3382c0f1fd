//! File output: flat CSV with a reproducibility comment header, and a JSON
//! mirror for programmatic use. Re-running a command with the same inputs
//! reproduces the CSV body byte for byte; only the generated_at line varies.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use aoi_probe::ValidatedConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Report {
    /// Resolved config echoed into the header.
    pub config: ValidatedConfig,
    /// Seeds used by simulation-backed commands, if any.
    pub seeds: Option<Vec<u64>>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra header comments (e.g. the located optimum).
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(config: ValidatedConfig, columns: Vec<&'static str>) -> Self {
        Report {
            config,
            seeds: None,
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        match format {
            Format::Csv => self.write_csv(&mut out),
            Format::Json => self.write_json(&mut out),
        }
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn config_line(&self) -> String {
        let c = self.config.as_config();
        format!(
            "n={} xi={} m={} delta={} mechanism={} q={} eta={}",
            c.n, c.xi, c.m, c.delta, c.mechanism, c.q, c.eta
        )
    }

    fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# generated_at_unix={}", unix_now())?;
        writeln!(out, "# config: {}", self.config_line())?;
        if let Some(seeds) = &self.seeds {
            writeln!(out, "# seeds: {}", join_u64(seeds))?;
        }
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    fn write_json(&self, out: &mut impl Write) -> std::io::Result<()> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (col, value) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), cell_to_json(value));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "generated_at_unix": unix_now(),
            "config": self.config.as_config(),
            "seeds": self.seeds,
            "notes": self.notes,
            "rows": rows,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)
    }
}

fn cell_to_json(value: &str) -> serde_json::Value {
    if value.is_empty() {
        return serde_json::Value::Null;
    }
    if let Ok(x) = value.parse::<i64>() {
        return serde_json::json!(x);
    }
    if let Ok(x) = value.parse::<f64>() {
        return serde_json::json!(x);
    }
    serde_json::Value::String(value.to_string())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn join_u64(values: &[u64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Full-precision float cell (round-trip shortest representation).
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
