//! Operation counting under the cost model where each evaluation of an
//! elementary function value or derivative costs one unit, and additions,
//! multiplications and constants are free.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::dual::{apply_dual, Dual};
use super::elementary::Elementary;
use crate::error::Result;

/// Shared evaluation counter. Clones refer to the same count.
#[derive(Clone, Debug, Default)]
pub struct Counter(Arc<AtomicU64>);

impl Counter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::SeqCst);
    }

    fn charge(&self, units: u64) {
        self.0.fetch_add(units, Ordering::SeqCst);
    }
}

/// A value (with an optional forward tangent) tied to a shared counter.
#[derive(Clone, Debug)]
pub struct CountingScalar {
    dual: Dual,
    counter: Counter,
}

impl CountingScalar {
    /// A free constant.
    pub fn constant(counter: &Counter, value: f64) -> Self {
        Self {
            dual: Dual::from_real(value),
            counter: counter.clone(),
        }
    }

    /// An input with the given forward seed.
    pub fn input(counter: &Counter, value: f64, tangent: f64) -> Self {
        Self {
            dual: Dual::new(value, tangent),
            counter: counter.clone(),
        }
    }

    pub fn value(&self) -> f64 {
        self.dual.primal
    }

    /// Forward tangent; zero unless derivatives were requested along the way.
    pub fn tangent(&self) -> f64 {
        self.dual.tangent
    }

    pub fn counter(&self) -> &Counter {
        &self.counter
    }
}

/// Evaluates `f` on counted arguments. Charges one unit for the value and one
/// more for the derivative when `include_derivative` is set; arithmetic
/// operators are free.
pub fn counting_eval(
    f: &Elementary,
    args: &[CountingScalar],
    include_derivative: bool,
) -> Result<CountingScalar> {
    let counter = args
        .first()
        .map(|a| a.counter.clone())
        .unwrap_or_default();
    let duals: Vec<Dual> = args.iter().map(|a| a.dual).collect();
    let dual = if f.is_arithmetic() {
        apply_dual(f, &duals)?
    } else if include_derivative {
        let d = apply_dual(f, &duals)?;
        counter.charge(2);
        d
    } else {
        let primals: Vec<f64> = duals.iter().map(|d| d.primal).collect();
        let v = f.eval(&primals)?;
        counter.charge(1);
        Dual::from_real(v)
    };
    Ok(CountingScalar { dual, counter })
}

/// Evaluates the partial derivative `∂f/∂arg_k` as a fresh value, charging
/// one unit unless `f` is arithmetic.
pub fn counting_partial(f: &Elementary, args: &[CountingScalar], k: usize) -> Result<CountingScalar> {
    let counter = args[0].counter.clone();
    let primals: Vec<f64> = args.iter().map(|a| a.dual.primal).collect();
    f.check(&primals)?;
    if !f.is_arithmetic() {
        counter.charge(1);
    }
    Ok(CountingScalar {
        dual: Dual::from_real(f.partials(&primals)[k]),
        counter,
    })
}
