//! Dual numbers `x + x′ε` with `ε² = 0`.
//!
//! - `(a + a′ε) + (b + b′ε) = (a + b) + (a′ + b′)ε`
//! - `(a + a′ε)(b + b′ε) = ab + (ab′ + a′b)ε`
//! - `1 / (b + b′ε) = 1/b − (b′/b²)ε`, defined only for `b ≠ 0`
//!
//! The dual part carries one directional derivative through any composition
//! of lifted elementary functions.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::elementary::{recip_first, Elementary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dual {
    pub primal: f64,
    pub tangent: f64,
}

impl Dual {
    pub const ZERO: Dual = Dual::new(0.0, 0.0);
    pub const ONE: Dual = Dual::new(1.0, 0.0);
    /// The nilpotent unit `ε = (0, 1)`.
    pub const EPSILON: Dual = Dual::new(0.0, 1.0);

    pub const fn new(primal: f64, tangent: f64) -> Self {
        Self { primal, tangent }
    }

    /// Embeds a real number with zero dual part.
    pub const fn from_real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    /// A seeded input `x + 1·ε`.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0)
    }

    /// Multiplicative inverse; exists iff the primal part is non-zero.
    pub fn recip(self) -> Result<Dual> {
        if self.primal == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let [r, d1] = recip_first(self.primal);
        Ok(Dual::new(r, self.tangent * d1))
    }

    /// `self · rhs⁻¹`. Fails when `rhs.primal == 0`, even if a limit exists.
    pub fn checked_div(self, rhs: Dual) -> Result<Dual> {
        Ok(self * rhs.recip()?)
    }

    /// Integer power by repeated dual multiplication.
    pub fn powi(self, k: i32) -> Result<Dual> {
        if k == 0 {
            return Ok(Dual::ONE);
        }
        let mut acc = self;
        for _ in 1..k.unsigned_abs() {
            acc = acc * self;
        }
        if k < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    pub fn exp(self) -> Dual {
        lift_unary(&Elementary::Exp, self)
    }

    pub fn sin(self) -> Dual {
        lift_unary(&Elementary::Sin, self)
    }

    pub fn cos(self) -> Dual {
        lift_unary(&Elementary::Cos, self)
    }

    pub fn ln(self) -> Result<Dual> {
        lift_elementary(&Elementary::Ln, &[self])
    }

    pub fn sqrt(self) -> Result<Dual> {
        lift_elementary(&Elementary::Sqrt, &[self])
    }

    pub fn tan(self) -> Result<Dual> {
        lift_elementary(&Elementary::Tan, &[self])
    }
}

fn lift_unary(f: &Elementary, x: Dual) -> Dual {
    lift_elementary(f, &[x]).expect("total function")
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.primal, self.tangent)
    }
}

impl From<f64> for Dual {
    fn from(x: f64) -> Self {
        Dual::from_real(x)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.primal + rhs.primal, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.primal - rhs.primal, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.primal * rhs.primal,
            self.primal * rhs.tangent + self.tangent * rhs.primal,
        )
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.primal * rhs, self.tangent * rhs)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.primal, -self.tangent)
    }
}

impl Sum for Dual {
    fn sum<I: Iterator<Item = Dual>>(iter: I) -> Dual {
        iter.fold(Dual::ZERO, Add::add)
    }
}

/// Lifts an elementary function to dual arguments:
/// `φ̂(x + x′ε) = φ(x) + (∇φ(x)·x′)ε`.
pub fn lift_elementary(f: &Elementary, args: &[Dual]) -> Result<Dual> {
    let primals: Vec<f64> = args.iter().map(|a| a.primal).collect();
    f.check(&primals)?;
    let tangents: Vec<f64> = args.iter().map(|a| a.tangent).collect();
    Ok(Dual::new(f.value(&primals), f.directional(&primals, &tangents)))
}

/// Dual evaluation of an elementary function through the algebra: arithmetic
/// operators use dual arithmetic directly, everything else is lifted.
pub(crate) fn apply_dual(f: &Elementary, args: &[Dual]) -> Result<Dual> {
    match f {
        Elementary::Add => Ok(args[0] + args[1]),
        Elementary::Sub => Ok(args[0] - args[1]),
        Elementary::Mul => Ok(args[0] * args[1]),
        Elementary::Neg => Ok(-args[0]),
        Elementary::Identity => Ok(args[0]),
        Elementary::Div => args[0].checked_div(args[1]),
        Elementary::PowI(k) => {
            f.check(&[args[0].primal])?;
            args[0].powi(*k)
        }
        other => lift_elementary(other, args),
    }
}

/// First-degree Taylor polynomial of `f` about the primal point, evaluated at
/// the dual argument: `Σ_{|k|≤1} (x′ε)^k / k! · ∂^k f(x)`.
///
/// Each term is formed with dual multiplication, so the computation passes
/// through `ε` explicitly instead of contracting the gradient directly.
pub fn taylor_first_degree(f: &Elementary, args: &[Dual]) -> Result<Dual> {
    let primals: Vec<f64> = args.iter().map(|a| a.primal).collect();
    f.check(&primals)?;
    let grad = f.partials(&primals);
    let mut acc = Dual::from_real(f.value(&primals));
    for (arg, g) in args.iter().zip(grad) {
        let increment = Dual::EPSILON * arg.tangent;
        acc = acc + increment * Dual::from_real(g);
    }
    Ok(acc)
}
