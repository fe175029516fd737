//! The scalar contract shared by every differentiation algebra.

use super::counting::{counting_eval, Counter, CountingScalar};
use super::dual::{apply_dual, Dual};
use super::elementary::Elementary;
use crate::error::Result;

/// A commutative algebra over the reals into which elementary functions can
/// be lifted. The generic evaluator runs any function definition over any
/// implementation.
pub trait Algebra {
    type Elem: Clone;

    /// Embeds a real constant.
    fn constant(&self, c: f64) -> Self::Elem;

    /// Applies a lifted elementary function.
    fn apply(&self, f: &Elementary, args: &[Self::Elem]) -> Result<Self::Elem>;
}

/// Plain real evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reals;

impl Algebra for Reals {
    type Elem = f64;

    fn constant(&self, c: f64) -> f64 {
        c
    }

    fn apply(&self, f: &Elementary, args: &[f64]) -> Result<f64> {
        f.eval(args)
    }
}

/// Forward mode over dual numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Duals;

impl Algebra for Duals {
    type Elem = Dual;

    fn constant(&self, c: f64) -> Dual {
        Dual::from_real(c)
    }

    fn apply(&self, f: &Elementary, args: &[Dual]) -> Result<Dual> {
        apply_dual(f, args)
    }
}

/// Counted evaluation; with `include_derivative` this is counted forward mode.
#[derive(Clone, Debug, Default)]
pub struct Counting {
    pub counter: Counter,
    pub include_derivative: bool,
}

impl Counting {
    pub fn new(include_derivative: bool) -> Self {
        Self {
            counter: Counter::new(),
            include_derivative,
        }
    }
}

impl Algebra for Counting {
    type Elem = CountingScalar;

    fn constant(&self, c: f64) -> CountingScalar {
        CountingScalar::constant(&self.counter, c)
    }

    fn apply(&self, f: &Elementary, args: &[CountingScalar]) -> Result<CountingScalar> {
        counting_eval(f, args, self.include_derivative)
    }
}
