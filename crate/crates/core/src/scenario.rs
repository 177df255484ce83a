//! Scenario documents and injection trace files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{Injection, InjectionTrace};
use crate::config::EngineConfig;
use crate::error::ConfigError;
use crate::model::{Round, Station, MAX_STATIONS};
use crate::rational::Rational;

/// Rounds beyond this are refused when reading traces.
pub const MAX_TRACE_ROUND: Round = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub config: EngineConfig,
    #[serde(default, skip_serializing_if = "is_empty_outputs")]
    pub output: Outputs,
    /// Rates used by `sweep`, each as `p/q`.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "rational_list")]
    pub sweep: Vec<Rational>,
}

fn is_empty_outputs(o: &Outputs) -> bool {
    *o == Outputs::default()
}

mod rational_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON for this schema: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let scenario: ScenarioFile = serde_json::from_str(text)?;
    scenario.config.validate()?;
    Ok(scenario)
}

pub fn write_scenario(scenario: &ScenarioFile) -> String {
    serde_json::to_string_pretty(scenario).expect("scenarios serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("trace header must be `round,station,destination`")]
    Header,
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    round: Round,
    station: Station,
    destination: Station,
}

/// Reads a `round,station,destination` CSV into a trace whose horizon is the
/// last round mentioned.
pub fn parse_trace_csv(text: &str) -> Result<InjectionTrace, TraceParseError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|_| TraceParseError::Header)?;
    if header.iter().collect::<Vec<_>>() != ["round", "station", "destination"] {
        return Err(TraceParseError::Header);
    }
    let mut rows = Vec::new();
    for rec in reader.deserialize::<TraceRow>() {
        let row_err = |line: u64, reason: String| TraceParseError::Row { line, reason };
        let row = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        if row.round == 0 || row.round > MAX_TRACE_ROUND {
            return Err(row_err(rows.len() as u64 + 2, format!("round {} outside [1, {MAX_TRACE_ROUND}]", row.round)));
        }
        if row.station >= MAX_STATIONS || row.destination >= MAX_STATIONS {
            return Err(row_err(rows.len() as u64 + 2, "station outside [0, 64)".into()));
        }
        rows.push(row);
    }
    rows.sort_by_key(|r| r.round);
    let horizon = rows.last().map_or(0, |r| r.round);
    let mut trace = InjectionTrace::empty(horizon);
    for r in rows {
        trace.push(r.round, Injection { station: r.station, destination: r.destination });
    }
    Ok(trace)
}

pub fn write_trace_csv(trace: &InjectionTrace) -> String {
    let mut out = String::from("round,station,destination\n");
    for (round, inj) in trace.iter() {
        out.push_str(&format!("{round},{},{}\n", inj.station, inj.destination));
    }
    out
}
