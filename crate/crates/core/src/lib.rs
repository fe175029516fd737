//! Scalar automatic differentiation.
//!
//! - [`scalar`]: dual numbers, the elementary function catalogue, and the
//!   [`Algebra`] contract shared by every evaluation mode.
//! - [`expr`]: function definitions, the text front-end, the evaluation
//!   schedule and DOT export.
//! - [`jet`]: truncated multivariate Taylor polynomials for all partials up to
//!   a fixed order.
//! - [`tower`]: lazy univariate derivative sequences.
//! - [`trace`]: the dense state-space formulation, used as a reference.
//! - [`engine`]: forward mode, tape-based reverse mode, Jacobians and
//!   operation-count comparisons.

pub mod engine;
pub mod error;
pub mod expr;
pub mod jet;
pub mod scalar;
pub mod tower;
pub mod trace;

pub use engine::{
    backprop, cost_compare, forward_directional, jacobian, record, reverse_gradient, CostRecord,
    JacobianMode, Scenario, Seed, SeedSpec, Tape, TapeEntry, TapeOperand,
};
pub use error::{Error, Result};
pub use expr::{parse, FunctionBuilder, FunctionDef, Node, NodeId, Scheduled};
pub use jet::{Basis, Jet, JetAlgebra, JetShape};
pub use scalar::{Algebra, Counting, CountingScalar, Dual, Duals, Elementary, Reals};
pub use tower::{Tower, Towers};
pub use trace::{StateProgram, TraceRecord};
