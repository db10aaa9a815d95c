//! Run configuration shared by every subcommand, loadable from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{ModelParams, Tolerances};
use crate::resonance::GreenNormalization;

/// Evenly spaced points `start, ..., end`; a single point when `points == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            end: value,
            points: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.end } else { self.start + step * i as f64 })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        let ok = self.start.is_finite()
            && self.end.is_finite()
            && self.points >= 1
            && self.start <= self.end
            && (self.points > 1 || self.start == self.end);
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{name}: need finite start <= end and points >= 1 (a single point needs start = end), got {self:?}"
            )))
        }
    }

    fn validate_within(&self, name: &str, lo: f64, hi: f64) -> Result<(), CliError> {
        self.validate(name)?;
        if self.start > lo && self.end < hi {
            Ok(())
        } else {
            Err(CliError::Config(format!("{name} must lie inside ({lo}, {hi}), got [{}, {}]", self.start, self.end)))
        }
    }
}

/// Parses `value` or `start:end:points`.
pub fn parse_grid(text: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match parts.as_slice() {
        [v] => Ok(Grid::single(number(v)?)),
        [a, b, n] => Ok(Grid {
            start: number(a)?,
            end: number(b)?,
            points: n.trim().parse().map_err(|e| format!("'{n}': {e}"))?,
        }),
        _ => Err(format!("expected VALUE or START:END:POINTS, got '{text}'")),
    }
}

/// Parses a dot position `y1,y2`.
pub fn parse_dot(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected Y1,Y2, got '{text}'"));
    }
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    Ok([number(parts[0])?, number(parts[1])?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a run depends on. Unset sections fall back to the defaults
/// documented per subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub dots: Vec<[f64; 2]>,
    pub betas: Vec<f64>,
    /// Dot distance for single-dot and mirror-pair commands when `dots` is empty.
    pub a: Option<f64>,
    pub a_range: Option<Grid>,
    pub b_grid: Option<Grid>,
    pub lambda_grid: Option<Grid>,
    pub x1_grid: Option<Grid>,
    pub x2_grid: Option<Grid>,
    pub normalization: GreenNormalization,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            dots: Vec::new(),
            betas: Vec::new(),
            a: None,
            a_range: None,
            b_grid: None,
            lambda_grid: None,
            x1_grid: None,
            x2_grid: None,
            normalization: GreenNormalization::Consistent,
            tolerances: Tolerances::default(),
            format: OutputFormat::Csv,
            output: None,
        }
    }
}

impl RunConfig {
    /// Reads a configuration document. A JSON output file of an earlier run
    /// is accepted as well: its embedded `config` object is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let invalid = |e: serde_json::Error| CliError::Config(format!("{}: {e}", path.display()));
        match value {
            serde_json::Value::Object(mut map) if map.contains_key("config") && map.contains_key("rows") => {
                serde_json::from_value(map.remove("config").unwrap_or_default()).map_err(invalid)
            }
            // Parsed again from text so that errors carry line and column.
            _ => serde_json::from_str(&text).map_err(invalid),
        }
    }

    fn check_alpha(&self) -> Result<(), CliError> {
        if self.alpha > 0.0 && self.alpha.is_finite() {
            Ok(())
        } else {
            Err(CliError::Config(format!("alpha must be positive, got {}", self.alpha)))
        }
    }

    pub fn threshold(&self) -> f64 {
        -0.25 * self.alpha * self.alpha
    }

    /// Dots as given, or one dot at `(0, a)`.
    pub fn model(&self) -> Result<ModelParams, CliError> {
        self.check_alpha()?;
        let dots = if self.dots.is_empty() {
            match self.a {
                Some(a) => vec![[0.0, a]],
                None => return Err(CliError::Config("no dot: give --dot or --a".into())),
            }
        } else {
            self.dots.clone()
        };
        Ok(ModelParams::new(self.alpha, dots, self.betas.clone())?.with_tolerances(self.tolerances))
    }

    pub fn single_model(&self) -> Result<ModelParams, CliError> {
        let model = self.model()?;
        if model.len() != 1 {
            return Err(CliError::Config(format!("this command takes one dot, got {}", model.len())));
        }
        Ok(model)
    }

    pub fn single_beta(&self) -> Result<f64, CliError> {
        match self.betas.as_slice() {
            [beta] if beta.is_finite() => Ok(*beta),
            _ => Err(CliError::Config(format!("this command takes one beta, got {:?}", self.betas))),
        }
    }

    pub fn pair_distance(&self) -> Result<f64, CliError> {
        match (self.a, self.dots.as_slice()) {
            (Some(a), _) if a > 0.0 => Ok(a),
            (None, [[_, y]]) if *y != 0.0 => Ok(y.abs()),
            _ => Err(CliError::Config("mirror pair needs --a > 0".into())),
        }
    }

    pub fn a_values(&self) -> Result<Vec<f64>, CliError> {
        let grid = self.a_range.ok_or_else(|| CliError::Config("missing a-range".into()))?;
        grid.validate_within("a-range", 0.0, f64::INFINITY)?;
        Ok(grid.values())
    }

    pub fn b_values(&self) -> Result<Vec<f64>, CliError> {
        let grid = self.b_grid.ok_or_else(|| CliError::Config("missing b grid".into()))?;
        grid.validate("b grid")?;
        Ok(grid.values())
    }

    /// The requested grid, or 200 points spanning the channel with a margin
    /// of `1e-6 alpha^2` at both ends.
    pub fn lambda_values(&self) -> Result<Vec<f64>, CliError> {
        self.check_alpha()?;
        let threshold = self.threshold();
        let grid = self.lambda_grid.unwrap_or_else(|| {
            let margin = 1e-6 * self.alpha * self.alpha;
            Grid {
                start: threshold + margin,
                end: -margin,
                points: 200,
            }
        });
        grid.validate_within("lambda grid", threshold, 0.0)?;
        Ok(grid.values())
    }

    pub fn plane_points(&self) -> Result<Vec<[f64; 2]>, CliError> {
        let x1 = self.x1_grid.ok_or_else(|| CliError::Config("missing x1 grid".into()))?;
        let x2 = self.x2_grid.ok_or_else(|| CliError::Config("missing x2 grid".into()))?;
        x1.validate("x1 grid")?;
        x2.validate("x2 grid")?;
        let xs = x1.values();
        Ok(x2.values().into_iter().flat_map(|b| xs.iter().map(move |&a| [a, b])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0").unwrap(), Grid::single(0.0));
        let g = parse_grid("1:2:5").unwrap();
        assert_eq!(g.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("x").is_err());
        assert_eq!(parse_dot("0.5, -1").unwrap(), [0.5, -1.0]);
        assert!(parse_dot("1").is_err());
    }

    #[test]
    fn invalid_grids_rejected() {
        let bad = Grid { start: 2.0, end: 1.0, points: 3 };
        assert!(bad.validate("g").is_err());
        let cfg = RunConfig {
            lambda_grid: Some(Grid { start: -0.3, end: -0.1, points: 3 }),
            ..RunConfig::default()
        };
        assert!(cfg.lambda_values().is_err());
        let default_grid = RunConfig::default().lambda_values().unwrap();
        assert_eq!(default_grid.len(), 200);
        assert!(default_grid[0] > -0.25 && default_grid[199] < 0.0);
    }

    #[test]
    fn unknown_fields_rejected_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, "{\n  \"alpha\": 1.0,\n  \"alhpa\": 2.0\n}").unwrap();
        let err = RunConfig::load(&path).unwrap_err().to_string();
        assert!(err.contains("alhpa") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn model_resolution() {
        let cfg = RunConfig {
            a: Some(2.0),
            betas: vec![0.1],
            ..RunConfig::default()
        };
        assert_eq!(cfg.single_model().unwrap().dots, vec![[0.0, 2.0]]);
        assert!(RunConfig::default().model().is_err());
        let two = RunConfig {
            dots: vec![[0.0, 1.0], [1.0, 1.0]],
            betas: vec![0.1, 0.2],
            ..RunConfig::default()
        };
        assert!(two.single_model().is_err());
        assert!(two.model().is_ok());
    }
}
