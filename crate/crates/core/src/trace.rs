//! The state-space formulation, evaluated literally.
//!
//! A function becomes `f = P_Y ∘ Φ_μ ∘ ⋯ ∘ Φ₁ ∘ P_X` on `H = ℝ^{n+μ}`, where
//! transition `Φᵢ` fills slot `n+i` from earlier slots. Derivatives are
//! formed by materializing every Jacobian `Φ′ᵢ` as a dense matrix and
//! multiplying, forward (`P_Y Φ′_μ ⋯ Φ′₁ P_X ẋ`) or transposed for the
//! reverse direction. This is slow by design and serves as the reference
//! for the engine.
//!
//! Slots are 0-based here: inputs occupy `0..n` and step `i` (1-based,
//! matching `Φᵢ`) writes slot `n+i-1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{FunctionDef, Node, NodeId, Scheduled};
use crate::scalar::Elementary;

/// Largest state dimension `n+μ` for which matrices are materialized.
pub const DENSE_LIMIT: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Slot(usize),
    Const(f64),
}

#[derive(Clone, Debug)]
pub struct Step {
    pub f: Elementary,
    pub args: Vec<Operand>,
    pub out: usize,
}

#[derive(Clone, Debug)]
pub struct StateProgram {
    n: usize,
    steps: Vec<Step>,
    output_slots: Vec<usize>,
}

/// States `v⁽⁰⁾…v⁽ᵘ⁾` plus, optionally, the derivative sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub states: Vec<DVector<f64>>,
    pub derivatives: Derivatives,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Derivatives {
    None,
    /// `v′⁽⁰⁾…v′⁽ᵘ⁾`.
    Forward(Vec<DVector<f64>>),
    /// `v̄⁽ᵘ⁾…v̄⁽⁰⁾`, in the order they are computed.
    Reverse(Vec<DVector<f64>>),
}

impl StateProgram {
    /// One step per scheduled transition; bare variable or constant outputs
    /// become explicit copy steps.
    pub fn compile(def: &FunctionDef) -> StateProgram {
        let n = def.n();
        let mut slot: Vec<Option<usize>> = vec![None; def.nodes().len()];
        for (i, s) in slot.iter_mut().enumerate().take(n) {
            *s = Some(i);
        }
        let operand = |id: NodeId, slot: &[Option<usize>]| match def.node(id) {
            Node::Constant(c) => Operand::Const(*c),
            _ => Operand::Slot(slot[id.0].expect("argument scheduled earlier")),
        };
        let mut steps = Vec::new();
        let mut output_slots = vec![usize::MAX; def.m()];
        for item in def.schedule() {
            let out = n + steps.len();
            match item {
                Scheduled::Node(id) => {
                    let Node::Apply(f, args) = def.node(id) else {
                        unreachable!()
                    };
                    let args = args.iter().map(|&a| operand(a, &slot)).collect();
                    steps.push(Step {
                        f: f.clone(),
                        args,
                        out,
                    });
                    slot[id.0] = Some(out);
                }
                Scheduled::OutputCopy { output, source } => {
                    steps.push(Step {
                        f: Elementary::Identity,
                        args: vec![operand(source, &slot)],
                        out,
                    });
                    output_slots[output] = out;
                }
            }
        }
        for (j, root) in def.outputs().iter().enumerate() {
            if output_slots[j] == usize::MAX {
                output_slots[j] = slot[root.0].expect("output scheduled");
            }
        }
        StateProgram {
            n,
            steps,
            output_slots,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.output_slots.len()
    }

    pub fn mu(&self) -> usize {
        self.steps.len()
    }

    /// `n + μ`.
    pub fn dim(&self) -> usize {
        self.n + self.steps.len()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn output_slots(&self) -> &[usize] {
        &self.output_slots
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

    fn check_dense(&self) -> Result<()> {
        if self.dim() > DENSE_LIMIT {
            Err(Error::TooLarge {
                dim: self.dim(),
                limit: DENSE_LIMIT,
            })
        } else {
            Ok(())
        }
    }

    fn arg_values(&self, step: &Step, state: &DVector<f64>) -> Vec<f64> {
        step.args
            .iter()
            .map(|a| match a {
                Operand::Slot(s) => state[*s],
                Operand::Const(c) => *c,
            })
            .collect()
    }

    /// `P_X`: embeds the inputs into `H`.
    pub fn embed(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    /// `P_Y`: selects the output slots.
    pub fn project(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.m(), self.dim());
        for (j, &s) in self.output_slots.iter().enumerate() {
            p[(j, s)] = 1.0;
        }
        p
    }

    /// `v⁽⁰⁾ = P_X c`, then `v⁽ⁱ⁾ = Φᵢ(v⁽ⁱ⁻¹⁾)`.
    pub fn forward_trace(&self, c: &[f64]) -> Result<TraceRecord> {
        Self::check_len("point", self.n, c.len())?;
        let mut v = DVector::zeros(self.dim());
        v.rows_mut(0, self.n).copy_from_slice(c);
        let mut states = vec![v.clone()];
        for (i, step) in self.steps.iter().enumerate() {
            let args = self.arg_values(step, &v);
            v[step.out] = step.f.eval(&args).map_err(|e| Error::AtNode {
                path: format!("step {} ({})", i + 1, step.f),
                source: Box::new(e),
            })?;
            states.push(v.clone());
        }
        Ok(TraceRecord {
            states,
            derivatives: Derivatives::None,
        })
    }

    /// `Φ′ᵢ` at the state before step `i` (0-based index): the identity
    /// with row `out` replaced by the partials of the step's function, and
    /// a zero on that row's diagonal.
    pub fn transition_jacobian(&self, i: usize, state: &DVector<f64>) -> DMatrix<f64> {
        let step = &self.steps[i];
        let mut m = DMatrix::identity(self.dim(), self.dim());
        m.row_mut(step.out).fill(0.0);
        let grad = step.f.partials(&self.arg_values(step, state));
        for (a, g) in step.args.iter().zip(grad) {
            if let Operand::Slot(s) = a {
                m[(step.out, *s)] += g;
            }
        }
        m
    }

    /// `J_f(c)·ẋ` by dense matrix products; also returns the full trace.
    pub fn forward_derivative_trace(&self, c: &[f64], xdot: &[f64]) -> Result<(DVector<f64>, TraceRecord)> {
        Self::check_len("direction", self.n, xdot.len())?;
        self.check_dense()?;
        let mut record = self.forward_trace(c)?;
        let mut d = self.embed() * DVector::from_column_slice(xdot);
        let mut derivs = vec![d.clone()];
        for i in 0..self.steps.len() {
            d = self.transition_jacobian(i, &record.states[i]) * d;
            derivs.push(d.clone());
        }
        let y = self.project() * &d;
        record.derivatives = Derivatives::Forward(derivs);
        Ok((y, record))
    }

    pub fn forward_derivative(&self, c: &[f64], xdot: &[f64]) -> Result<DVector<f64>> {
        Ok(self.forward_derivative_trace(c, xdot)?.0)
    }

    /// `ȳ·J_f(c)` through the transposed product `P_Xᵀ Φ′₁ᵀ ⋯ Φ′_μᵀ P_Yᵀ ȳᵀ`.
    pub fn reverse_derivative_trace(&self, c: &[f64], ybar: &[f64]) -> Result<(DVector<f64>, TraceRecord)> {
        Self::check_len("covector", self.m(), ybar.len())?;
        self.check_dense()?;
        let mut record = self.forward_trace(c)?;
        let mut a = self.project().transpose() * DVector::from_column_slice(ybar);
        let mut adjoints = vec![a.clone()];
        for i in (0..self.steps.len()).rev() {
            a = self.transition_jacobian(i, &record.states[i]).transpose() * a;
            adjoints.push(a.clone());
        }
        let g = self.embed().transpose() * &a;
        record.derivatives = Derivatives::Reverse(adjoints);
        Ok((g, record))
    }

    pub fn reverse_derivative(&self, c: &[f64], ybar: &[f64]) -> Result<DVector<f64>> {
        Ok(self.reverse_derivative_trace(c, ybar)?.0)
    }
}

impl TraceRecord {
    /// One row per vector: `kind,index,slot values…`, numbers in shortest
    /// round-trip form. Forward derivative rows are indexed like the states;
    /// adjoint rows carry the index `i` of `v̄⁽ⁱ⁾`.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, |v| v.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["kind".to_string(), "index".to_string()];
        header.extend((1..=dim).map(|s| format!("v{s}")));
        w.write_record(&header).expect("in-memory write");
        let mut row = |kind: &str, index: usize, v: &DVector<f64>| {
            let mut r = vec![kind.to_string(), index.to_string()];
            r.extend(v.iter().map(|x| format!("{x:?}")));
            w.write_record(&r).expect("in-memory write");
        };
        for (i, v) in self.states.iter().enumerate() {
            row("state", i, v);
        }
        match &self.derivatives {
            Derivatives::None => {}
            Derivatives::Forward(ds) => {
                for (i, v) in ds.iter().enumerate() {
                    row("tangent", i, v);
                }
            }
            Derivatives::Reverse(ds) => {
                let mu = ds.len() - 1;
                for (k, v) in ds.iter().enumerate() {
                    row("adjoint", mu - k, v);
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
