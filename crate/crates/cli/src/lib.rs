//! Scene-file driver for `reparam-core`.
//!
//! Every command reads a scene, validates it completely, runs, and ends with
//! a [`report::RunReport`]. Exit codes: 0 pass, 1 configuration, 2 numeric
//! or convergence failure (including failed checks), 3 I/O.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;
pub mod sampling;
pub mod scene;

use std::path::{Path, PathBuf};

use reparam_core::brane::DngNormalization;
use reparam_core::Error;

pub use config::{Format, SceneConfig};
pub use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(#[from] Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    /// Errors raised while turning scene values into core objects are
    /// configuration problems, not numerics.
    pub(crate) fn from_setup(e: Error) -> Self {
        match e {
            Error::UnknownPreset(_)
            | Error::MissingParam { .. }
            | Error::InvalidArgument(_)
            | Error::GaugeInvalid(_)
            | Error::DimMismatch { .. }
            | Error::InvalidShape { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Diagnose,
    Brane,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Diagnose => "diagnose",
            Command::Brane => "brane",
            Command::Sweep => "sweep",
        }
    }
}

/// Command-line values that take precedence over the scene file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub normalization: Option<DngNormalization>,
    pub quadrature_order: Option<usize>,
    pub refine: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SceneConfig) {
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = Some(f);
        }
        if let Some(n) = self.normalization {
            if let Some(b) = cfg.brane.as_mut() {
                b.normalization = n;
            }
        }
        if let Some(k) = self.quadrature_order {
            cfg.quadrature.order = k;
        }
        if let Some(r) = self.refine {
            cfg.quadrature.refine = r;
        }
    }

    // flags that change results, folded into the config hash
    fn fingerprint(&self) -> String {
        let mut s = String::new();
        if let Some(f) = self.format {
            s.push_str(&format!("--format={f:?}\n"));
        }
        if let Some(n) = self.normalization {
            s.push_str(&format!("--dng-normalization={n:?}\n"));
        }
        if let Some(k) = self.quadrature_order {
            s.push_str(&format!("--quadrature-order={k}\n"));
        }
        if let Some(r) = self.refine {
            s.push_str(&format!("--refine={r}\n"));
        }
        s
    }
}

pub fn load_scene(path: &Path) -> Result<SceneConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    SceneConfig::parse(&text)
}

/// Outcome of a command: the report, plus the error that cut the run short
/// when it ended early (partial outputs are still written).
#[derive(Debug)]
pub struct Outcome {
    pub command: Command,
    pub report: RunReport,
    pub failure: Option<CliError>,
    /// Resolved `[output] path`, after `--out`.
    pub output_path: Option<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match &self.failure {
            Some(e) => e.exit_code(),
            None if self.report.pass => 0,
            None => 2,
        }
    }
}

/// Runs a command on an already-parsed scene.
pub fn run(cmd: Command, mut cfg: SceneConfig, ov: &Overrides) -> Result<Outcome, CliError> {
    ov.apply(&mut cfg);
    if cfg.quadrature.order == 0 || cfg.quadrature.order > 64 {
        return Err(CliError::Config(
            "quadrature order must be in 1..=64".into(),
        ));
    }
    let hash_input = format!("{}{}", cfg.canonical, ov.fingerprint());
    let mut report = RunReport::new(cmd.name(), &hash_input, ov.seed);
    let failure = match cmd {
        Command::Simulate => commands::simulate::run(&cfg, &mut report)?,
        Command::Diagnose => commands::diagnose::run(&cfg, ov.seed, &mut report)?,
        Command::Brane => commands::brane::run(&cfg, ov.seed, &mut report)?,
        Command::Sweep => commands::sweep::run(&cfg, &mut report)?,
    };
    report.finish(failure.as_ref());
    Ok(Outcome {
        command: cmd,
        report,
        failure,
        output_path: cfg.output.path.clone(),
    })
}

/// Where the report goes: trajectories and tables own stdout when they have
/// no file, so their report moves to stderr; diagnose and brane write the
/// report to the output path when one is set.
pub fn emit_report(o: &Outcome) -> Result<(), CliError> {
    let json = o.report.to_json();
    match (o.command, &o.output_path) {
        (Command::Simulate | Command::Sweep, None) => eprint!("{json}"),
        (Command::Simulate | Command::Sweep, Some(_)) => print!("{json}"),
        (Command::Diagnose | Command::Brane, Some(p)) => {
            std::fs::write(p, json).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
        }
        (Command::Diagnose | Command::Brane, None) => print!("{json}"),
    }
    Ok(())
}

/// Load, run and report; returns the process exit code.
pub fn execute(cmd: Command, scene: &Path, ov: &Overrides) -> i32 {
    let result = load_scene(scene).and_then(|cfg| run(cmd, cfg, ov));
    match result {
        Ok(outcome) => {
            if let Some(e) = &outcome.failure {
                eprintln!("reparam {}: {e}", cmd.name());
            }
            if let Err(e) = emit_report(&outcome) {
                eprintln!("reparam {}: {e}", cmd.name());
                return e.exit_code();
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("reparam {}: {e}", cmd.name());
            e.exit_code()
        }
    }
}
