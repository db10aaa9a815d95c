//! Command-line front end.
//!
//! Every subcommand reads an optional JSON configuration, applies flag
//! overrides, computes a table and writes it as CSV or JSON. Exit codes:
//! 0 success, 2 configuration error, 3 convergence failure, 4 selftest
//! failure. `LEAKYWIRE_THREADS` caps the worker pool.

mod commands;
pub mod config;
pub mod output;
mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{Grid, OutputFormat, RunConfig};
pub use output::Report;

use crate::bound::beta_for_level;
use crate::resonance::GreenNormalization;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("selftest failed: {0}")]
    Selftest(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Convergence(_) => 3,
            Self::Selftest(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::Nonconvergence { .. }
            | E::BracketFailure(_)
            | E::NoConvergence { .. }
            | E::OutOfRegion { .. }
            | E::ContourThroughZero(_)
            | E::PrecisionExhausted(_)
            | E::GridResolution(_) => Self::Convergence(e.to_string()),
            E::CutContact(_)
            | E::Domain(_)
            | E::PoleAtEndpoint(_)
            | E::Threshold { .. }
            | E::PoleOnPath(_)
            | E::InvalidModel(_)
            | E::SingularPoint(_) => Self::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "leakywire", version, about = "Bound states, resonances and scattering for a leaky wire with point interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound states below the guided threshold.
    Spectrum(CommonArgs),
    /// Single-dot bound-state wave function on a rectangular grid.
    Eigenfunction(CommonArgs),
    /// Resonance pole trajectory over a range of dot distances.
    Resonance(CommonArgs),
    /// Reflection and transmission amplitudes across the guided channel.
    Scatter(CommonArgs),
    /// Mirror pair with broken symmetry: pole trajectory in b.
    Twopoint(CommonArgs),
    /// Compare production routines against the independent oracles.
    Selftest(OutputArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file (standard output if omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration; also accepts a JSON output of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Line coupling strength alpha > 0.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Dot position `y1,y2`; repeat for several dots.
    #[arg(long = "dot", value_parser = config::parse_dot, allow_hyphen_values = true)]
    pub dots: Vec<[f64; 2]>,
    /// Coupling parameter per dot, in the order of `--dot`.
    #[arg(long = "beta", allow_hyphen_values = true)]
    pub betas: Vec<f64>,
    /// Decoupled dot level in (-inf, 0); sets the single beta.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "betas")]
    pub level: Option<f64>,
    /// Distance of a single dot, or of each dot of the mirror pair, from the line.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// `START:END:POINTS` of dot distances (resonance).
    #[arg(long = "a-range", value_parser = config::parse_grid, allow_hyphen_values = true)]
    pub a_range: Option<Grid>,
    /// Asymmetry `b` as `VALUE` or `START:END:POINTS` (twopoint).
    #[arg(long = "b", value_parser = config::parse_grid, allow_hyphen_values = true)]
    pub b_grid: Option<Grid>,
    /// Energies `START:END:POINTS` inside the channel (scatter).
    #[arg(long = "lambda", value_parser = config::parse_grid, allow_hyphen_values = true)]
    pub lambda_grid: Option<Grid>,
    /// Horizontal grid `START:END:POINTS` (eigenfunction).
    #[arg(long = "x1", value_parser = config::parse_grid, allow_hyphen_values = true)]
    pub x1_grid: Option<Grid>,
    /// Vertical grid `START:END:POINTS` (eigenfunction).
    #[arg(long = "x2", value_parser = config::parse_grid, allow_hyphen_values = true)]
    pub x2_grid: Option<Grid>,
    /// Green's factor normalisation in the mirror-pair equation.
    #[arg(long, value_parser = parse_normalization)]
    pub normalization: Option<GreenNormalization>,
    /// Absolute quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub rel_tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_normalization(text: &str) -> Result<GreenNormalization, String> {
    match text {
        "consistent" => Ok(GreenNormalization::Consistent),
        "bare" => Ok(GreenNormalization::Bare),
        _ => Err(format!("expected 'consistent' or 'bare', got '{text}'")),
    }
}

impl CommonArgs {
    /// Configuration file (if any) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if !self.dots.is_empty() {
            cfg.dots = self.dots.clone();
        }
        if !self.betas.is_empty() {
            cfg.betas = self.betas.clone();
        }
        if let Some(level) = self.level {
            cfg.betas = vec![beta_for_level(level)?];
        }
        if let Some(a) = self.a {
            cfg.a = Some(a);
            cfg.dots.clear();
        }
        macro_rules! overwrite {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = Some(v);
                }
            )*};
        }
        overwrite!(a_range, b_grid, lambda_grid, x1_grid, x2_grid);
        if let Some(n) = self.normalization {
            cfg.normalization = n;
        }
        if let Some(v) = self.abs_tol {
            cfg.tolerances.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.tolerances.rel_tol = v;
        }
        if !(cfg.tolerances.abs_tol > 0.0 && cfg.tolerances.rel_tol > 0.0) {
            return Err(CliError::Config(format!("tolerances must be positive, got {:?}", cfg.tolerances)));
        }
        apply_output(&mut cfg, &self.output);
        Ok(cfg)
    }
}

fn apply_output(cfg: &mut RunConfig, args: &OutputArgs) {
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(p) = &args.output {
        cfg.output = Some(p.clone());
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Eigenfunction(_) => "eigenfunction",
            Self::Resonance(_) => "resonance",
            Self::Scatter(_) => "scatter",
            Self::Twopoint(_) => "twopoint",
            Self::Selftest(_) => "selftest",
        }
    }

    pub fn config(&self) -> Result<RunConfig, CliError> {
        match self {
            Self::Selftest(out) => {
                let mut cfg = RunConfig::default();
                apply_output(&mut cfg, out);
                Ok(cfg)
            }
            Self::Spectrum(a) | Self::Eigenfunction(a) | Self::Resonance(a) | Self::Scatter(a) | Self::Twopoint(a) => a.resolve(),
        }
    }
}

/// Computes the report for `command` under `config`.
pub fn run(command: &Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Spectrum(_) => commands::spectrum(config),
        Command::Eigenfunction(_) => commands::eigenfunction(config),
        Command::Resonance(_) => commands::resonance(config),
        Command::Scatter(_) => commands::scatter(config),
        Command::Twopoint(_) => commands::twopoint(config),
        Command::Selftest(_) => Ok(selftest::selftest()),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("LEAKYWIRE_THREADS") {
        let threads: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("LEAKYWIRE_THREADS must be a positive integer, got '{text}'")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = cli.command.config()?;
    let report = thread_pool()?.install(|| run(&cli.command, &config))?;
    let text = output::render(cli.command.name(), &config, &report)?;
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parses `args` and runs the selected subcommand, reporting failures on
/// standard error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leakywire: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("leakywire").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_become_config() {
        let cli = parse(&["spectrum", "--alpha", "1.5", "--dot", "0,1", "--dot", "2,-1", "--beta", "0.2", "--beta", "-0.1"]);
        let cfg = cli.command.config().unwrap();
        assert_eq!(cfg.alpha, 1.5);
        assert_eq!(cfg.dots, vec![[0.0, 1.0], [2.0, -1.0]]);
        assert_eq!(cfg.betas, vec![0.2, -0.1]);
    }

    #[test]
    fn level_sets_beta() {
        let cfg = parse(&["scatter", "--a", "2", "--level", "-0.1"]).command.config().unwrap();
        assert!((crate::bound::epsilon_beta(cfg.betas[0]) + 0.1).abs() < 1e-15);
        assert_eq!(cfg.a, Some(2.0));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"alpha": 2.0, "betas": [0.5], "a": 1.0}"#).unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["scatter", "--config", p, "--beta", "0.1"]).command.config().unwrap();
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.betas, vec![0.1]);
        assert_eq!(cfg.a, Some(1.0));
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(crate::Error::InvalidModel("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(crate::Error::NoConvergence { iterations: 1, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Selftest(String::new()).exit_code(), 4);
    }
}
