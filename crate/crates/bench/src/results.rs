//! Result tables written as CSV with `#`-prefixed metadata lines.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One aggregated cell of an experiment: a configuration and its statistics over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub sampler: String,
    /// Graph metric, `-` when no graph is involved.
    pub metric: String,
    pub k: usize,
    /// Graph neighbor count, empty when no graph is involved.
    pub knn: Option<usize>,
    /// Mean of the reported quantity (error, score or accuracy).
    pub mean: f64,
    pub std: f64,
    /// Mean wall time per run; empty when timing is disabled.
    pub runtime_ms: Option<f64>,
    pub seed: u64,
    pub runs: usize,
    /// Runs that could not be evaluated (for example disconnected graphs).
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub command: String,
    pub seed: u64,
    pub config_json: String,
    pub notes: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(command: &str, seed: u64, config_json: String) -> Self {
        Self {
            command: command.to_owned(),
            seed,
            config_json,
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Sorts rows by dataset, sampler, metric, k, knn and seed.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.dataset, &a.sampler, &a.metric, a.k, a.knn, a.seed)
                .cmp(&(&b.dataset, &b.sampler, &b.metric, b.k, b.knn, b.seed))
        });
    }

    pub fn find(&self, sampler: &str, metric: &str, k: usize, knn: Option<usize>) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sampler == sampler && r.metric == metric && r.k == k && r.knn == knn)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut text = metadata_header(&self.command, self.seed, &self.config_json, &self.notes);
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        if self.rows.is_empty() {
            writer.write_record([
                "dataset", "sampler", "metric", "k", "knn", "mean", "std", "runtime_ms", "seed", "runs",
                "failed",
            ])?;
        }
        let body = writer.into_inner().map_err(|e| e.into_error())?;
        text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(text)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    /// Reads a table written by [`ResultTable::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut table = ResultTable::new("", 0, String::new());
        for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
            if let Some(v) = line.strip_prefix("command: ") {
                table.command = v.to_owned();
            } else if let Some(v) = line.strip_prefix("seed: ") {
                table.seed = v.parse().unwrap_or_default();
            } else if let Some(v) = line.strip_prefix("config: ") {
                table.config_json = v.to_owned();
            } else if let Some(v) = line.strip_prefix("note: ") {
                table.notes.push(v.to_owned());
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        for row in reader.deserialize() {
            table.rows.push(row?);
        }
        Ok(table)
    }
}

/// `#`-prefixed lines recording tool version, command, seed, configuration and notes.
pub fn metadata_header(command: &str, seed: u64, config_json: &str, notes: &[String]) -> String {
    let mut text = String::new();
    writeln!(text, "# dpp-landmarks {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(text, "# command: {command}").unwrap();
    writeln!(text, "# seed: {seed}").unwrap();
    writeln!(text, "# config: {config_json}").unwrap();
    for note in notes {
        writeln!(text, "# note: {note}").unwrap();
    }
    text
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
