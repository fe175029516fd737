//! Dual numbers, the elementary function catalogue and the scalar algebra
//! contract.

mod algebra;
mod counting;
mod dual;
mod elementary;

pub use algebra::{Algebra, Counting, Duals, Reals};
pub use counting::{counting_eval, counting_partial, Counter, CountingScalar};
pub use dual::{lift_elementary, taylor_first_degree, Dual};
pub use elementary::{powi_repeated, Catalogue, CustomFn, Elementary};

pub(crate) use elementary::recip_derivatives;
