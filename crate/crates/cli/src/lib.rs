//! Reproducible experiments driven by one config file.

pub mod config;
pub mod experiments;

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub use config::{ConfigError, ExperimentConfig, Format};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub artifact_version: String,
    pub rows: Vec<Value>,
    pub summary: Value,
    /// `None` when the experiment asserts no inequality.
    pub passed: Option<bool>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.passed != Some(false)
    }

    /// Everything except the wall clock, which is the only non-deterministic part.
    pub fn results(&self) -> Value {
        serde_json::json!({ "rows": self.rows, "summary": self.summary, "passed": self.passed })
    }
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !experiments::NAMES.contains(&cfg.experiment.as_str()) {
        return Err(ConfigError::UnknownExperiment(cfg.experiment.clone()));
    }
    if experiments::is_stochastic(&cfg.experiment) && cfg.seed.is_none() {
        return Err(ConfigError::Field {
            field: "seed".into(),
            message: format!("{} is stochastic and needs a seed", cfg.experiment),
        });
    }
    experiments::check_params(&cfg.experiment, &cfg.params)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    validate(cfg)?;
    let start = Instant::now();
    let out = experiments::run(&cfg.experiment, &cfg.params, cfg.seed.unwrap_or(0))
        .with_context(|| format!("experiment {}", cfg.experiment))?;
    Ok(RunRecord {
        config: cfg.clone(),
        artifact_version: ARTIFACT_VERSION.into(),
        rows: out.rows,
        summary: out.summary,
        passed: out.passed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(_) => match v.as_f64() {
            Some(f) if v.is_f64() => format!("{f:.16e}"),
            _ => v.to_string(),
        },
        other => martin_core::io::to_json(other).unwrap_or_default(),
    }
}

pub fn render(record: &RunRecord, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = martin_core::io::to_json(record)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let header: Vec<String> = match record.rows.first() {
                Some(Value::Object(m)) => m.keys().cloned().collect(),
                _ => Vec::new(),
            };
            if !header.is_empty() {
                w.write_record(&header)?;
            }
            for row in &record.rows {
                w.write_record(header.iter().map(|k| cell(row.get(k).unwrap_or(&Value::Null))))?;
            }
            Ok(w.into_inner().context("flushing csv")?)
        }
    }
}

/// Renders `record` and writes it to `out` atomically, or to stdout when `out` is `None`.
pub fn emit(record: &RunRecord, format: Format, out: Option<&Path>) -> Result<()> {
    let bytes = render(record, format)?;
    match out {
        Some(p) => martin_core::io::write_atomic(p, &bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}
