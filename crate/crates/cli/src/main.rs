//! Batch front-end for `oplimit`.
//!
//! Exit codes: 0 yes/pass, 1 no/fail, 2 unknown, 3 input error. The JSON
//! report goes to `--out` (stdout when absent); a one-line summary goes to
//! stderr.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oplimit::linalg::Tolerance;
use oplimit::opsys::Ladder;

#[derive(Debug, Parser)]
#[command(name = "oplimit", version, about = "Operator systems, tensor cones and inductive limits at finite stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_EPS)]
    pub eps: f64,
    /// Archimedean ladder, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [1e-3, 1e-6, 1e-9])]
    pub ladder: Vec<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Matrix level (sampling level for map checks).
    #[arg(long, global = true)]
    pub level: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Input JSON file.
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Output JSON file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON array of named systems referenced by other inputs.
    #[arg(long, global = true)]
    pub systems: Option<PathBuf>,
    /// UHF rule, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gamma: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Validate a system file.
    ValidateSystem,
    /// Check a map for unital complete positivity.
    CheckUcp,
    /// Check a map for being a complete order embedding.
    CheckOrderMono,
    /// Test membership in the min tensor cone.
    TensorMin,
    /// Search for a max tensor cone certificate.
    TensorMaxCert,
    /// Build a sequence and report its stages and connecting maps.
    LimitBuild,
    /// Decide equality of two limit elements.
    LimitEq,
    /// Decide positivity of a limit element.
    LimitPos,
    /// Build the map out of the limit induced by a compatible family.
    UniversalMap,
    /// Build the map between limits induced by a commuting family.
    InducedMap,
    /// Min/max nuclearity evidence for a pair or a sequence.
    NuclearityReport,
    /// Build a UHF sequence and check its canonical injections.
    UhfDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    fn code(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Unknown => 2,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Library(oplimit::Error),
}

impl From<oplimit::Error> for Failure {
    fn from(e: oplimit::Error) -> Self {
        Failure::Library(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(msg) => f.write_str(msg),
            Failure::Library(e) => write!(f, "{e}"),
        }
    }
}

pub struct Outcome {
    pub verdict: Verdict,
    pub report: serde_json::Value,
    pub summary: String,
}

impl RunConfig {
    pub fn tolerance(&self) -> Result<Tolerance, Failure> {
        Ok(Tolerance::new(self.eps)?)
    }

    pub fn ladder(&self) -> Result<Ladder, Failure> {
        Ok(Ladder::new(self.ladder.clone())?)
    }

    pub fn input_path(&self) -> Result<&std::path::Path, Failure> {
        self.input
            .as_deref()
            .ok_or_else(|| Failure::Input("missing --in".into()))
    }
}

fn emit(config: &RunConfig, outcome: &Outcome) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| Failure::Input(format!("report serialization: {e}")))?;
    text.push('\n');
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = commands::run(cli.command, &cli.config).and_then(|o| emit(&cli.config, &o).map(|_| o));
    match result {
        Ok(o) => {
            eprintln!("{}", o.summary);
            ExitCode::from(o.verdict.code())
        }
        Err(e) => {
            eprintln!("input error: {e}");
            ExitCode::from(3)
        }
    }
}
