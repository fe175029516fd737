use std::path::PathBuf;

use adkit::Scenario;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "adkit", version, about = "Scalar automatic differentiation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a function and one of its derivatives at a point.
    Diff(DiffArgs),
    /// Print the computational graph as Graphviz DOT.
    Graph(GraphArgs),
    /// Count elementary evaluations, symbolic re-evaluation vs forward mode.
    Bench(BenchArgs),
}

/// Comma-separated reals, e.g. `5,2` or `-1.5,0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reals(pub Vec<f64>);

pub fn reals(s: &str) -> Result<Reals, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("{t:?} is not a finite number")),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Reals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Directional derivative `J·dir`.
    Forward,
    /// Covector-Jacobian product `cov·J`.
    Reverse,
    /// All partials up to `--order`.
    Jet,
    /// Derivatives `f, f′, …` up to `--order` of a univariate function.
    Tower,
    /// The full Jacobian.
    Jacobian,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Forward => "forward",
            Mode::Reverse => "reverse",
            Mode::Jet => "jet",
            Mode::Tower => "tower",
            Mode::Jacobian => "jacobian",
        }
    }
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// Function definition, e.g. "f(x1,x2) = x2*cos(x1*x1+3)".
    pub expr: String,
    /// Evaluation point.
    #[arg(long, value_parser = reals, allow_hyphen_values = true)]
    pub at: Reals,
    #[arg(long, value_enum, default_value_t = Mode::Forward)]
    pub mode: Mode,
    /// Direction for forward mode (default 1 for a univariate function).
    #[arg(long, value_parser = reals, allow_hyphen_values = true)]
    pub dir: Option<Reals>,
    /// Covector for reverse mode (default 1 for a single output).
    #[arg(long, value_parser = reals, allow_hyphen_values = true)]
    pub cov: Option<Reals>,
    /// Truncation order for jet and tower modes.
    #[arg(long)]
    pub order: Option<usize>,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write the state-space trace (forward or reverse mode) as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Function definition.
    pub expr: String,
    /// Label nodes with primal and tangent values, e.g. "at=1,1;dir=1,0".
    #[arg(long, allow_hyphen_values = true)]
    pub annotate: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Function family: chain, product or shared.
    #[arg(long)]
    pub scenario: Scenario,
    /// Largest family size; rows run from 1 to this.
    #[arg(long)]
    pub max_n: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Splits `at=…,dir=…` (either `;` or `,` before `dir=`) into its vectors.
pub fn annotation(spec: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let usage = || format!("--annotate expects \"at=…,dir=…\", got {spec:?}");
    let rest = spec.trim().strip_prefix("at=").ok_or_else(usage)?;
    let split = rest.find("dir=").ok_or_else(usage)?;
    let at = rest[..split].trim_end_matches([',', ';', ' ']);
    let dir = &rest[split + "dir=".len()..];
    Ok((reals(at)?.0, reals(dir)?.0))
}
