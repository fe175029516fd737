//! Differentiation drivers: matrix-free forward mode over dual numbers, a
//! compact tape for reverse mode, Jacobian assembly and operation counts.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{parse, FunctionDef, Node, NodeId, Scheduled};
use crate::scalar::{
    counting_eval, counting_partial, Counter, Counting, CountingScalar, Dual, Duals, Elementary,
};

/// Evaluation point plus a forward direction or a reverse covector.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSpec {
    pub point: Vec<f64>,
    pub seed: Seed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Seed {
    /// `ẋ ∈ ℝⁿ`.
    Direction(Vec<f64>),
    /// `ȳ ∈ ℝ^{1×m}`.
    Covector(Vec<f64>),
}

impl SeedSpec {
    pub fn forward(point: Vec<f64>, direction: Vec<f64>) -> Self {
        Self {
            point,
            seed: Seed::Direction(direction),
        }
    }

    pub fn reverse(point: Vec<f64>, covector: Vec<f64>) -> Self {
        Self {
            point,
            seed: Seed::Covector(covector),
        }
    }

    /// Checks every length against `def`.
    pub fn validate(&self, def: &FunctionDef) -> Result<()> {
        check_len("point", def.n(), self.point.len())?;
        match &self.seed {
            Seed::Direction(d) => check_len("direction", def.n(), d.len()),
            Seed::Covector(y) => check_len("covector", def.m(), y.len()),
        }
    }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            actual,
        })
    }
}

/// `(f(c), J_f(c)·ẋ)` by evaluating over dual numbers `cᵢ + ẋᵢε`.
pub fn forward_directional(def: &FunctionDef, seed: &SeedSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    seed.validate(def)?;
    let Seed::Direction(dir) = &seed.seed else {
        return Err(Error::Seed("forward mode needs a direction"));
    };
    let inputs: Vec<Dual> = seed
        .point
        .iter()
        .zip(dir)
        .map(|(&c, &t)| Dual::new(c, t))
        .collect();
    let out = def.eval_generic(&inputs, &Duals)?;
    Ok(out.iter().map(|d| (d.primal, d.tangent)).unzip())
}

/// Where a tape entry reads an argument from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TapeOperand {
    Input(usize),
    Entry(usize),
    Const(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TapeEntry {
    pub f: Elementary,
    pub args: Vec<TapeOperand>,
    pub primal: f64,
    /// `∂f/∂arg_k` at the recorded arguments.
    pub partials: Vec<f64>,
}

/// The recorded forward sweep, in schedule order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tape {
    n: usize,
    entries: Vec<TapeEntry>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.outputs.len()
    }

    pub fn entries(&self) -> &[TapeEntry] {
        &self.entries
    }

    /// Entry index holding each output.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// `f(c)`.
    pub fn values(&self) -> Vec<f64> {
        self.outputs.iter().map(|&e| self.entries[e].primal).collect()
    }
}

/// Evaluates `def` at `c`, caching every primal and local partial.
pub fn record(def: &FunctionDef, c: &[f64]) -> Result<Tape> {
    check_len("point", def.n(), c.len())?;
    let mut entry_of: Vec<Option<usize>> = vec![None; def.nodes().len()];
    let operand = |id: NodeId, entry_of: &[Option<usize>]| match def.node(id) {
        Node::Variable(i) => TapeOperand::Input(*i),
        Node::Constant(v) => TapeOperand::Const(*v),
        Node::Apply(..) => TapeOperand::Entry(entry_of[id.0].expect("recorded earlier")),
    };
    let mut entries: Vec<TapeEntry> = Vec::new();
    let mut outputs: Vec<Option<usize>> = vec![None; def.m()];
    for step in def.schedule() {
        let (f, args, node) = match step {
            Scheduled::Node(id) => {
                let Node::Apply(f, args) = def.node(id) else {
                    unreachable!()
                };
                let args: Vec<TapeOperand> = args.iter().map(|&a| operand(a, &entry_of)).collect();
                (f.clone(), args, Some(id))
            }
            Scheduled::OutputCopy { output, source } => {
                outputs[output] = Some(entries.len());
                (Elementary::Identity, vec![operand(source, &entry_of)], None)
            }
        };
        let values: Vec<f64> = args
            .iter()
            .map(|a| match *a {
                TapeOperand::Input(i) => c[i],
                TapeOperand::Entry(e) => entries[e].primal,
                TapeOperand::Const(v) => v,
            })
            .collect();
        let primal = match node {
            Some(id) => f.eval(&values).map_err(|e| def.at_node(id, e))?,
            None => f.eval(&values)?,
        };
        let partials = f.partials(&values);
        if let Some(id) = node {
            entry_of[id.0] = Some(entries.len());
        }
        entries.push(TapeEntry {
            f,
            args,
            primal,
            partials,
        });
    }
    let outputs = def
        .outputs()
        .iter()
        .zip(outputs)
        .map(|(root, copy)| copy.or(entry_of[root.0]).expect("output recorded"))
        .collect();
    Ok(Tape {
        n: def.n(),
        entries,
        outputs,
    })
}

/// `ȳ·J_f(c)` by one reverse sweep. Each argument's adjoint accumulates
/// one contribution per consumer, which handles fan-out.
pub fn backprop(tape: &Tape, ybar: &[f64]) -> Result<Vec<f64>> {
    check_len("covector", tape.m(), ybar.len())?;
    let mut adjoint = vec![0.0; tape.entries.len()];
    let mut input = vec![0.0; tape.n];
    for (&e, &y) in tape.outputs.iter().zip(ybar) {
        adjoint[e] += y;
    }
    for (i, entry) in tape.entries.iter().enumerate().rev() {
        let a = adjoint[i];
        for (arg, p) in entry.args.iter().zip(&entry.partials) {
            match *arg {
                TapeOperand::Input(k) => input[k] += a * p,
                TapeOperand::Entry(j) => adjoint[j] += a * p,
                TapeOperand::Const(_) => {}
            }
        }
    }
    Ok(input)
}

/// `(f(c), ȳ·J_f(c))` by recording a tape and sweeping it backwards.
pub fn reverse_gradient(def: &FunctionDef, seed: &SeedSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    seed.validate(def)?;
    let Seed::Covector(ybar) = &seed.seed else {
        return Err(Error::Seed("reverse mode needs a covector"));
    };
    let tape = record(def, &seed.point)?;
    Ok((tape.values(), backprop(&tape, ybar)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// One forward pass per input.
    Forward,
    /// One reverse sweep per output over a single tape.
    Reverse,
}

/// The `m×n` Jacobian at `c`.
pub fn jacobian(def: &FunctionDef, c: &[f64], mode: JacobianMode) -> Result<DMatrix<f64>> {
    check_len("point", def.n(), c.len())?;
    let (n, m) = (def.n(), def.m());
    let mut jac = DMatrix::zeros(m, n);
    let unit = |len: usize, k: usize| {
        let mut e = vec![0.0; len];
        e[k] = 1.0;
        e
    };
    match mode {
        JacobianMode::Forward => {
            for j in 0..n {
                let (_, col) = forward_directional(def, &SeedSpec::forward(c.to_vec(), unit(n, j)))?;
                jac.set_column(j, &nalgebra::DVector::from_vec(col));
            }
        }
        JacobianMode::Reverse => {
            let tape = record(def, c)?;
            for i in 0..m {
                let row = backprop(&tape, &unit(m, i))?;
                jac.set_row(i, &nalgebra::RowDVector::from_vec(row));
            }
        }
    }
    Ok(jac)
}

/// Function families of the operation-count comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// `φₙ ∘ ⋯ ∘ φ₁`.
    Chain,
    /// `φₙ * (φₙ₋₁ * (⋯ (φ₂ * φ₁)))`.
    Product,
    /// `φ₁(z) + ⋯ + φₙ(z)` with `z = ψ(x)` bound once.
    Shared,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Chain, Scenario::Product, Scenario::Shared];

    /// Source text of the size-`n` member. The `φᵢ` cycle through
    /// `sin, exp, cos`; `ψ = exp`.
    pub fn source(self, n: usize) -> String {
        let phi = |i: usize| ["sin", "exp", "cos"][i % 3];
        match self {
            Scenario::Chain => {
                let mut body = "x".to_string();
                for i in 0..n {
                    body = format!("{}({body})", phi(i));
                }
                format!("f(x) = {body}")
            }
            Scenario::Product => {
                let mut body = format!("{}(x)", phi(0));
                for i in 1..n {
                    body = if i == 1 {
                        format!("{}(x) * {body}", phi(i))
                    } else {
                        format!("{}(x) * ({body})", phi(i))
                    };
                }
                format!("f(x) = {body}")
            }
            Scenario::Shared => {
                let mut body = format!("{}(z)", phi(0));
                for i in 1..n {
                    body = if i == 1 {
                        format!("{}(z) + {body}", phi(i))
                    } else {
                        format!("{}(z) + ({body})", phi(i))
                    };
                }
                format!("f(x) = let z = exp(x) in {body}")
            }
        }
    }

    pub fn function(self, n: usize) -> FunctionDef {
        parse(&self.source(n)).expect("generated source parses")
    }

    /// Closed-form symbolic count: `n(n+1)/2`, `n²`, or `2n+1` (with `ψ′`
    /// factored out).
    pub fn closed_form_symbolic(self, n: u64) -> u64 {
        match self {
            Scenario::Chain => n * (n + 1) / 2,
            Scenario::Product => n * n,
            Scenario::Shared => 2 * n + 1,
        }
    }

    /// Closed-form forward-mode count: `2n`, `2n`, `2n+2`.
    pub fn closed_form_ad(self, n: u64) -> u64 {
        match self {
            Scenario::Chain | Scenario::Product => 2 * n,
            Scenario::Shared => 2 * n + 2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Chain => "chain",
            Scenario::Product => "product",
            Scenario::Shared => "shared",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "chain" => Ok(Scenario::Chain),
            "product" => Ok(Scenario::Product),
            "shared" => Ok(Scenario::Shared),
            other => Err(format!("unknown scenario {other:?} (chain, product, shared)")),
        }
    }
}

/// Counted evaluations for one scenario size.
#[derive(Clone, Debug, PartialEq)]
pub struct CostRecord {
    pub scenario: Scenario,
    pub n: u64,
    /// Symbolic re-evaluation count (for `shared`, with `ψ′` factored out).
    pub symbolic: u64,
    /// Forward-mode count for value and derivative.
    pub ad: u64,
    /// `shared` only: the symbolic count without factoring out `ψ′`.
    pub symbolic_unfactored: Option<u64>,
    pub closed_form_symbolic: u64,
    pub closed_form_ad: u64,
    /// `f′(c)` as assembled by the symbolic simulation.
    pub symbolic_derivative: f64,
    /// `f′(c)` from counted forward mode.
    pub ad_derivative: f64,
}

/// Point at which the comparisons are evaluated.
pub const COST_POINT: f64 = 0.5;

/// Runs both the symbolic re-evaluation pattern and forward mode on the
/// size-`n` member of `scenario` under the counting algebra.
///
/// The symbolic side evaluates the derivative expression a symbolic system
/// would produce, term by term, recomputing every inner value it needs
/// (no sharing between terms); products and sums are free.
pub fn cost_compare(scenario: Scenario, n: usize) -> Result<CostRecord> {
    if n == 0 {
        return Err(Error::Dimension {
            what: "scenario size",
            expected: 1,
            actual: 0,
        });
    }
    let def = scenario.function(n);
    let (symbolic, symbolic_derivative, symbolic_unfactored) = simulate_symbolic(scenario, &def)?;

    let alg = Counting::new(true);
    let x = CountingScalar::input(&alg.counter, COST_POINT, 1.0);
    let y = def.eval_generic(&[x], &alg)?;
    let n64 = n as u64;
    Ok(CostRecord {
        scenario,
        n: n64,
        symbolic,
        ad: alg.counter.get(),
        symbolic_unfactored,
        closed_form_symbolic: scenario.closed_form_symbolic(n64),
        closed_form_ad: scenario.closed_form_ad(n64),
        symbolic_derivative,
        ad_derivative: y[0].tangent(),
    })
}

/// The unary elementaries applied to the input or the shared value, in
/// schedule order, and the shared node for `Shared`.
fn unary_nodes(def: &FunctionDef) -> Vec<Elementary> {
    def.schedule()
        .into_iter()
        .filter_map(|s| match s {
            Scheduled::Node(id) => match def.node(id) {
                Node::Apply(f, _) if f.arity() == 1 => Some(f.clone()),
                _ => None,
            },
            Scheduled::OutputCopy { .. } => None,
        })
        .collect()
}

fn simulate_symbolic(scenario: Scenario, def: &FunctionDef) -> Result<(u64, f64, Option<u64>)> {
    let counter = Counter::new();
    let x = || CountingScalar::input(&counter, COST_POINT, 0.0);
    let value = |f: &Elementary, a: CountingScalar| counting_eval(f, &[a], false);
    let deriv = |f: &Elementary, a: CountingScalar| counting_partial(f, &[a], 0);
    let phis = unary_nodes(def);

    match scenario {
        Scenario::Chain => {
            // f′(c) = Π_k φ′_k(φ_{k−1}(⋯φ₁(c))), each prefix recomputed.
            let mut product = 1.0;
            for k in 0..phis.len() {
                let mut v = x();
                for f in &phis[..k] {
                    v = value(f, v)?;
                }
                product *= deriv(&phis[k], v)?.value();
            }
            Ok((counter.get(), product, None))
        }
        Scenario::Product => {
            // f′(c) = Σ_i φ′_i(c) · Π_{j≠i} φ_j(c).
            let mut sum = 0.0;
            for i in 0..phis.len() {
                let mut term = deriv(&phis[i], x())?.value();
                for (j, f) in phis.iter().enumerate() {
                    if j != i {
                        term *= value(f, x())?.value();
                    }
                }
                sum += term;
            }
            Ok((counter.get(), sum, None))
        }
        Scenario::Shared => {
            // f′(c) = ψ′(c) · Σ_i φ′_i(ψ(c)), with ψ(c) recomputed per term.
            let (psi, phis) = phis.split_first().expect("shared has a ψ node");
            let mut sum = 0.0;
            for f in phis {
                let z = value(psi, x())?;
                sum += deriv(f, z)?.value();
            }
            let factored = deriv(psi, x())?.value() * sum;
            let factored_count = counter.get();

            counter.reset();
            for f in phis {
                let z = value(psi, x())?;
                let _ = deriv(psi, x())?.value() * deriv(f, z)?.value();
            }
            Ok((factored_count, factored, Some(counter.get())))
        }
    }
}
