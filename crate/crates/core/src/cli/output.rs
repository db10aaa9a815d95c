//! Tables and their CSV / JSON renderings.

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{OutputFormat, RunConfig};
use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Count(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Number(v) if v.is_finite() => serde_json::to_string(v).unwrap_or_else(|_| v.to_string()),
            Self::Number(v) => v.to_string(),
            Self::Count(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Number(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Count(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// Result of a subcommand: a table, scalar summary entries, and whether
/// every row was computed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    /// Column names with their unit annotation, e.g. `energy[1]`.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Value)>,
    /// First failure among the rows, if any.
    pub failure: Option<CliError>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn fail(&mut self, error: CliError) {
        if self.failure.is_none() {
            self.failure = Some(error);
        }
    }

    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Shortest representation of a non-finite-safe number for summaries.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn render(command: &str, config: &RunConfig, report: &Report) -> Result<String, CliError> {
    match config.format {
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => render_json(command, config, report),
    }
}

fn render_csv(report: &Report) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    writer.write_record(&report.columns).map_err(io)?;
    for row in &report.rows {
        writer.write_record(row.iter().map(Cell::csv)).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let mut text = String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?;
    for (key, value) in &report.summary {
        text.push_str(&format!("# {key} = {value}\n"));
    }
    if !report.complete() {
        text.push_str("# incomplete = true\n");
    }
    Ok(text)
}

fn render_json(command: &str, config: &RunConfig, report: &Report) -> Result<String, CliError> {
    let summary: Map<String, Value> = report.summary.iter().cloned().collect();
    let document = json!({
        "command": command,
        "config": config,
        "columns": report.columns,
        "rows": report.rows,
        "summary": summary,
        "complete": report.complete(),
        "failure": report.failure.as_ref().map(|e| e.to_string()),
    });
    let mut text = serde_json::to_string_pretty(&document).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(&["x[1]", "label"]);
        r.push(vec![0.1.into(), "a, b".into()]);
        r.push(vec![f64::NAN.into(), 3usize.into()]);
        r.note("slope", number(1.5));
        r
    }

    #[test]
    fn csv_quotes_and_appends_summary() {
        let text = render_csv(&sample()).unwrap();
        assert_eq!(text, "x[1],label\n0.1,\"a, b\"\nNaN,3\n# slope = 1.5\n");
    }

    #[test]
    fn json_embeds_config() {
        let cfg = RunConfig::default();
        let text = render_json("scatter", &cfg, &sample()).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "scatter");
        assert_eq!(v["config"]["alpha"], 1.0);
        assert_eq!(v["rows"][1][0], Value::Null);
        assert_eq!(v["complete"], true);
    }
}
