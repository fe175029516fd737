//! The catalogue of elementary functions.
//!
//! Every algebra in the crate (reals, duals, counting scalars, jets, towers)
//! differentiates through the same closed set of primitives: the arithmetic
//! operators, integer powers, `exp`, `ln`, `sqrt`, `sin`, `cos`, `tan`, and an
//! identity used to copy values into output slots. Further functions can be
//! registered through [`CustomFn`].
//!
//! The k-th derivative tables in this module are shared by every lifting, so
//! a first-order jet and a dual number evaluate the exact same floating point
//! operations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type PartialsFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;
type DerivativesFn = dyn Fn(f64, usize) -> Vec<f64> + Send + Sync;

/// A user-registered elementary function.
///
/// `derivatives`, when present, must return `[f(x), f'(x), ..., f^(k)(x)]`
/// for a unary function; it enables lifting to jets of order above one.
pub struct CustomFn {
    name: String,
    arity: usize,
    value: Box<ValueFn>,
    partials: Box<PartialsFn>,
    domain: Option<Box<DomainFn>>,
    derivatives: Option<Box<DerivativesFn>>,
}

impl CustomFn {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        partials: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(arity >= 1, "elementary functions take at least one argument");
        Self {
            name: name.into(),
            arity,
            value: Box::new(value),
            partials: Box::new(partials),
            domain: None,
            derivatives: None,
        }
    }

    pub fn with_domain(mut self, domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Box::new(domain));
        self
    }

    pub fn with_derivatives(
        mut self,
        derivatives: impl Fn(f64, usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(self.arity, 1, "derivative tables are only supported for unary functions");
        self.derivatives = Some(Box::new(derivatives));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFn")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}

/// An elementary function together with its derivative rules.
#[derive(Clone, Debug)]
pub enum Elementary {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// Integer power, evaluated as repeated multiplication.
    PowI(i32),
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    /// Copies its argument; realizes outputs that are bare inputs or constants.
    Identity,
    Custom(Arc<CustomFn>),
}

impl PartialEq for Elementary {
    fn eq(&self, other: &Self) -> bool {
        use Elementary::*;
        match (self, other) {
            (PowI(a), PowI(b)) => a == b,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b) || a.name == b.name,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elementary::PowI(k) => write!(f, "^{k}"),
            other => f.write_str(other.name()),
        }
    }
}

impl Elementary {
    pub fn name(&self) -> &str {
        match self {
            Elementary::Add => "+",
            Elementary::Sub => "-",
            Elementary::Mul => "*",
            Elementary::Div => "/",
            Elementary::Neg => "neg",
            Elementary::PowI(_) => "pow",
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sqrt => "sqrt",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Tan => "tan",
            Elementary::Identity => "copy",
            Elementary::Custom(c) => &c.name,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Elementary::Add | Elementary::Sub | Elementary::Mul | Elementary::Div => 2,
            Elementary::Custom(c) => c.arity,
            _ => 1,
        }
    }

    /// Operations that only add or multiply already computed values. They
    /// are free under the operation-count cost model.
    pub fn is_arithmetic(&self) -> bool {
        matches!(
            self,
            Elementary::Add
                | Elementary::Sub
                | Elementary::Mul
                | Elementary::Neg
                | Elementary::PowI(_)
                | Elementary::Identity
        )
    }

    pub fn in_domain(&self, args: &[f64]) -> bool {
        if args.len() != self.arity() {
            return false;
        }
        match self {
            Elementary::Div => args[1] != 0.0,
            Elementary::PowI(k) => *k >= 0 || args[0] != 0.0,
            Elementary::Ln | Elementary::Sqrt => args[0] > 0.0,
            Elementary::Tan => args[0].cos() != 0.0,
            Elementary::Custom(c) => c.domain.as_ref().is_none_or(|d| d(args)),
            _ => true,
        }
    }

    /// Returns the appropriate error unless `args` is in the open domain.
    pub fn check(&self, args: &[f64]) -> Result<()> {
        if args.len() != self.arity() {
            return Err(Error::Dimension {
                what: "elementary arguments",
                expected: self.arity(),
                actual: args.len(),
            });
        }
        if self.in_domain(args) {
            Ok(())
        } else if matches!(self, Elementary::Div) {
            Err(Error::DivisionByZero)
        } else {
            Err(Error::Domain {
                function: self.name().to_string(),
                args: args.to_vec(),
            })
        }
    }

    /// The function value, without a domain check.
    pub fn value(&self, args: &[f64]) -> f64 {
        match self {
            Elementary::Add => args[0] + args[1],
            Elementary::Sub => args[0] - args[1],
            Elementary::Mul => args[0] * args[1],
            Elementary::Div => args[0] * (1.0 / args[1]),
            Elementary::Neg => -args[0],
            Elementary::PowI(k) => powi_repeated(args[0], *k),
            Elementary::Identity => args[0],
            Elementary::Custom(c) => (c.value)(args),
            unary => unary_derivatives(unary, args[0], 0)
                .expect("catalogue unary")[0],
        }
    }

    /// Domain-checked evaluation.
    pub fn eval(&self, args: &[f64]) -> Result<f64> {
        self.check(args)?;
        Ok(self.value(args))
    }

    /// The gradient `∇φ(args)`, without a domain check.
    pub fn partials(&self, args: &[f64]) -> Vec<f64> {
        match self {
            Elementary::Add => vec![1.0, 1.0],
            Elementary::Sub => vec![1.0, -1.0],
            Elementary::Mul => vec![args[1], args[0]],
            Elementary::Div => {
                let [r, d1] = recip_first(args[1]);
                vec![r, args[0] * d1]
            }
            Elementary::Neg => vec![-1.0],
            Elementary::Identity => vec![1.0],
            Elementary::PowI(0) => vec![0.0],
            Elementary::PowI(k) => vec![f64::from(*k) * powi_repeated(args[0], k - 1)],
            Elementary::Custom(c) => (c.partials)(args),
            unary => vec![unary_derivatives(unary, args[0], 1).expect("catalogue unary")[1]],
        }
    }

    /// The directional derivative `∇φ(args) · tangents`.
    ///
    /// Division contracts in the reciprocal-factored order used by dual
    /// division, so both routes agree bit for bit.
    pub fn directional(&self, args: &[f64], tangents: &[f64]) -> f64 {
        match self {
            Elementary::Div => {
                let [r, d1] = recip_first(args[1]);
                args[0] * (tangents[1] * d1) + tangents[0] * r
            }
            _ => {
                let grad = self.partials(args);
                let mut terms = tangents.iter().zip(&grad).map(|(t, g)| t * g);
                let first = terms.next().unwrap_or(0.0);
                terms.fold(first, |acc, term| acc + term)
            }
        }
    }

    /// `[f(x), f'(x), ..., f^(order)(x)]` for unary functions with a closed
    /// form derivative table. `None` for binary operators and for custom
    /// functions registered without a table.
    pub fn derivatives(&self, x: f64, order: usize) -> Option<Vec<f64>> {
        match self {
            Elementary::Custom(c) if c.arity == 1 => match &c.derivatives {
                Some(table) => Some(table(x, order)),
                None if order <= 1 => {
                    let mut d = vec![(c.value)(&[x])];
                    if order == 1 {
                        d.push((c.partials)(&[x])[0]);
                    }
                    Some(d)
                }
                None => None,
            },
            Elementary::Identity => Some(polynomial_table(&[0.0, 1.0], x, order)),
            Elementary::Neg => Some(polynomial_table(&[0.0, -1.0], x, order)),
            Elementary::PowI(k) => Some(powi_table(x, *k, order)),
            other => unary_derivatives(other, x, order),
        }
    }
}

/// `x^k` by left-to-right repeated multiplication; negative exponents take
/// the reciprocal of the positive power.
pub fn powi_repeated(x: f64, k: i32) -> f64 {
    let mut acc = 1.0;
    if k == 0 {
        return acc;
    }
    acc = x;
    for _ in 1..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// `[1/x, -1/x²]`, the reciprocal and its first derivative.
pub(crate) fn recip_first(x: f64) -> [f64; 2] {
    let d = recip_derivatives(x, 1);
    [d[0], d[1]]
}

/// `[1/x, -1/x², 2/x³, ...]` up to `order`.
pub(crate) fn recip_derivatives(x: f64, order: usize) -> Vec<f64> {
    let r = 1.0 / x;
    let mut out = Vec::with_capacity(order + 1);
    out.push(r);
    for k in 1..=order {
        let prev = out[k - 1];
        out.push(prev * -(k as f64) * r);
    }
    out
}

fn unary_derivatives(f: &Elementary, x: f64, order: usize) -> Option<Vec<f64>> {
    let table = match f {
        Elementary::Exp => vec![x.exp(); order + 1],
        Elementary::Ln => {
            let mut out = vec![x.ln()];
            if order >= 1 {
                let r = 1.0 / x;
                out.push(r);
                for k in 1..order {
                    let prev = out[k];
                    out.push(prev * -(k as f64) * r);
                }
            }
            out
        }
        Elementary::Sqrt => {
            let mut out = vec![x.sqrt()];
            for k in 0..order {
                let prev = out[k];
                out.push(prev * (0.5 - k as f64) / x);
            }
            out
        }
        Elementary::Sin | Elementary::Cos => {
            let (s, c) = x.sin_cos();
            let cycle = [s, c, -s, -c];
            let start = if matches!(f, Elementary::Sin) { 0 } else { 1 };
            (0..=order).map(|k| cycle[(start + k) % 4]).collect()
        }
        Elementary::Tan => {
            // d/dx P(tan x) = P'(tan x) (1 + tan² x)
            let t = x.tan();
            let mut poly = vec![0.0, 1.0];
            let mut out = vec![t];
            for _ in 0..order {
                let dp: Vec<f64> = poly
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c * i as f64)
                    .collect();
                let mut next = vec![0.0; dp.len() + 2];
                for (i, c) in dp.iter().enumerate() {
                    next[i] += c;
                    next[i + 2] += c;
                }
                poly = next;
                out.push(horner(&poly, t));
            }
            out
        }
        _ => return None,
    };
    Some(table)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn polynomial_table(coeffs: &[f64], x: f64, order: usize) -> Vec<f64> {
    let mut poly = coeffs.to_vec();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(horner(&poly, x));
        poly = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
    }
    out
}

fn powi_table(x: f64, k: i32, order: usize) -> Vec<f64> {
    let mut out = vec![powi_repeated(x, k)];
    let mut falling = 1.0;
    for j in 1..=order {
        falling *= f64::from(k) - (j as f64 - 1.0);
        let exponent = k - j as i32;
        out.push(if falling == 0.0 {
            0.0
        } else {
            falling * powi_repeated(x, exponent)
        });
    }
    out
}

/// Named lookup of elementary functions for the expression front-end.
#[derive(Clone, Debug)]
pub struct Catalogue {
    entries: BTreeMap<String, Elementary>,
}

impl Default for Catalogue {
    fn default() -> Self {
        Self::standard()
    }
}

impl Catalogue {
    /// `exp`, `ln`, `sqrt`, `sin`, `cos`, `tan`.
    pub fn standard() -> Self {
        let entries = [
            Elementary::Exp,
            Elementary::Ln,
            Elementary::Sqrt,
            Elementary::Sin,
            Elementary::Cos,
            Elementary::Tan,
        ]
        .into_iter()
        .map(|f| (f.name().to_string(), f))
        .collect();
        Self { entries }
    }

    pub fn register(&mut self, custom: CustomFn) -> Elementary {
        let f = Elementary::Custom(Arc::new(custom));
        self.entries.insert(f.name().to_string(), f.clone());
        f
    }

    pub fn get(&self, name: &str) -> Option<&Elementary> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
