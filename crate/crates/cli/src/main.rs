//! `adkit` command-line front-end.
//!
//! Exit status: 0 on success, 1 on a parse error, 2 on a domain error,
//! 3 on flag misuse.

mod args;
mod report;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use adkit::expr::{annotate, to_dot, ParseError};
use adkit::{
    cost_compare, forward_directional, jacobian, parse, reverse_gradient, Basis, FunctionDef,
    JacobianMode, JetAlgebra, SeedSpec, StateProgram, Tower, Towers,
};
use clap::Parser;
use thiserror::Error;

use args::{BenchArgs, Cli, Command, DiffArgs, GraphArgs, Mode};
use report::{BenchReport, CountRow, Counts, Derivative, Partial, Report};

/// Largest `--max-n` accepted by `bench`.
const MAX_BENCH_N: usize = 1000;
const DEFAULT_JET_ORDER: usize = 2;
const DEFAULT_TOWER_ORDER: usize = 4;

#[derive(Debug, Error)]
enum CliError {
    #[error("{}", render_parse_error(.text, .error))]
    Parse { text: String, error: ParseError },
    #[error("{0}")]
    Eval(#[from] adkit::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => 1,
            CliError::Eval(e) if e.is_domain() => 2,
            CliError::Eval(_) | CliError::Usage(_) => 3,
        }
    }
}

fn render_parse_error(text: &str, e: &ParseError) -> String {
    let line = text.lines().nth(e.line - 1).unwrap_or("");
    format!("parse error at {e}\n  {line}\n  {}^", " ".repeat(e.column.saturating_sub(1)))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load(expr: &str) -> Result<FunctionDef, CliError> {
    parse(expr).map_err(|error| CliError::Parse {
        text: expr.to_string(),
        error,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Diff(a) => diff(a),
        Command::Graph(a) => graph(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// The seed vector, defaulting to `[1]` when the matching dimension is 1.
fn seed_or_unit(seed: &Option<args::Reals>, dim: usize, flag: &str, mode: &str) -> Result<Vec<f64>, CliError> {
    match seed {
        Some(v) => Ok(v.0.clone()),
        None if dim == 1 => Ok(vec![1.0]),
        None => Err(usage(format!("{mode} mode needs --{flag} with {dim} components"))),
    }
}

fn check_flags(a: &DiffArgs) -> Result<(), CliError> {
    let mode = a.mode.name();
    if a.dir.is_some() && a.mode != Mode::Forward {
        return Err(usage(format!("--dir applies to forward mode, not {mode}")));
    }
    if a.cov.is_some() && a.mode != Mode::Reverse {
        return Err(usage(format!("--cov applies to reverse mode, not {mode}")));
    }
    if a.order.is_some() && !matches!(a.mode, Mode::Jet | Mode::Tower) {
        return Err(usage(format!("--order applies to jet and tower modes, not {mode}")));
    }
    if a.csv.is_some() && !matches!(a.mode, Mode::Forward | Mode::Reverse) {
        return Err(usage(format!("--csv applies to forward and reverse modes, not {mode}")));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn diff(a: &DiffArgs) -> Result<String, CliError> {
    check_flags(a)?;
    let def = load(&a.expr)?;
    let point = a.at.0.clone();
    if point.len() != def.n() {
        return Err(usage(format!("--at has {} components, {} takes {}", point.len(), def.name(), def.n())));
    }
    let (seed, value, derivative) = match a.mode {
        Mode::Forward => {
            let dir = seed_or_unit(&a.dir, def.n(), "dir", "forward")?;
            let (value, tangent) = forward_directional(&def, &SeedSpec::forward(point.clone(), dir.clone()))?;
            if let Some(path) = &a.csv {
                let (_, record) = StateProgram::compile(&def).forward_derivative_trace(&point, &dir)?;
                write_file(path, &record.to_csv())?;
            }
            (dir, value, Derivative::Rows(vec![tangent]))
        }
        Mode::Reverse => {
            let cov = seed_or_unit(&a.cov, def.m(), "cov", "reverse")?;
            let (value, grad) = reverse_gradient(&def, &SeedSpec::reverse(point.clone(), cov.clone()))?;
            if let Some(path) = &a.csv {
                let (_, record) = StateProgram::compile(&def).reverse_derivative_trace(&point, &cov)?;
                write_file(path, &record.to_csv())?;
            }
            (cov, value, Derivative::Rows(vec![grad]))
        }
        Mode::Jet => {
            let alg = JetAlgebra::new(def.n(), a.order.unwrap_or(DEFAULT_JET_ORDER), Basis::Berz)?;
            let jets = def.eval_generic(&alg.seed(&point)?, &alg)?;
            let value = jets.iter().map(|j| j.value()).collect();
            let partials = jets
                .iter()
                .enumerate()
                .flat_map(|(output, j)| {
                    j.partials().into_iter().map(move |(k, value)| Partial {
                        output,
                        multi_index: k.to_vec(),
                        value,
                    })
                })
                .collect();
            (vec![], value, Derivative::Partials(partials))
        }
        Mode::Tower => {
            if def.n() != 1 {
                return Err(usage(format!("tower mode needs a univariate function, {} takes {}", def.name(), def.n())));
            }
            let order = a.order.unwrap_or(DEFAULT_TOWER_ORDER);
            let towers = def.eval_generic(&[Tower::variable(point[0])], &Towers)?;
            let rows: Vec<Vec<f64>> = towers.iter().map(|t| t.take(order + 1)).collect();
            (vec![], rows.iter().map(|r| r[0]).collect(), Derivative::Rows(rows))
        }
        Mode::Jacobian => {
            let value = def.eval_generic(&point, &adkit::Reals)?;
            let jac = jacobian(&def, &point, JacobianMode::Reverse)?;
            let rows = jac.row_iter().map(|r| r.iter().copied().collect()).collect();
            (vec![], value, Derivative::Rows(rows))
        }
    };
    let report = Report {
        function: def.unparse(),
        mode: a.mode.name(),
        point,
        seed,
        value,
        derivative,
    };
    Ok(if a.json { report.to_json() } else { report.to_text() })
}

fn graph(a: &GraphArgs) -> Result<String, CliError> {
    let def = load(&a.expr)?;
    let annotations = match &a.annotate {
        None => None,
        Some(spec) => {
            let (at, dir) = args::annotation(spec).map_err(CliError::Usage)?;
            if at.len() != def.n() || dir.len() != def.n() {
                return Err(usage(format!("--annotate needs {} components for at and dir", def.n())));
            }
            Some(annotate(&def, &at, &dir)?)
        }
    };
    Ok(to_dot(&def, annotations.as_ref()))
}

fn bench(a: &BenchArgs) -> Result<String, CliError> {
    if !(1..=MAX_BENCH_N).contains(&a.max_n) {
        return Err(usage(format!("--max-n must be in 1..={MAX_BENCH_N}")));
    }
    let rows = (1..=a.max_n)
        .map(|n| {
            let r = cost_compare(a.scenario, n)?;
            Ok(CountRow {
                n: r.n,
                symbolic: r.symbolic,
                ad: r.ad,
                closed_form_symbolic: r.closed_form_symbolic,
                closed_form_ad: r.closed_form_ad,
                symbolic_unfactored: r.symbolic_unfactored,
            })
        })
        .collect::<Result<Vec<_>, adkit::Error>>()?;
    let report = BenchReport {
        function: a.scenario.source(a.max_n),
        mode: "bench",
        counts: Counts {
            scenario: a.scenario.to_string(),
            rows,
        },
    };
    if let Some(path) = &a.csv {
        write_file(path, &report.to_csv())?;
    }
    Ok(if a.json { report.to_json() } else { report.to_text() })
}
