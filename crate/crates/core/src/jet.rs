//! Truncated multivariate polynomial algebra `ℝ[X₁,…,Xₙ]/I_N`.
//!
//! A [`Jet`] stores one coefficient per monomial of total degree at most `N`.
//! Lifting a function to jets and evaluating it at `(c₁ + X₁, …, cₙ + Xₙ)`
//! produces every partial derivative of order at most `N` at `c`:
//!
//! - in the [`Basis::Standard`] basis, coefficient `k` multiplies
//!   `X₁^k₁ ⋯ Xₙ^kₙ`, and the partial is `k₁!⋯kₙ!` times the coefficient;
//! - in the [`Basis::Berz`] basis, coefficient `k` multiplies
//!   `X₁^k₁/k₁! ⋯ Xₙ^kₙ/kₙ!`, and equals the partial directly.
//!
//! Elementary functions are lifted by truncated Taylor composition,
//! `f(𝔣) = Σ_k (𝔣 − x)^k / k! · f^(k)(x)`, which is exact in the quotient
//! because `𝔣 − x` is nilpotent.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{recip_derivatives, Algebra, Elementary};

/// Largest truncation order; `12!` is the largest factorial for which every
/// basis conversion factor below it is exact in double precision.
pub const MAX_ORDER: usize = 12;

const MAX_PRODUCTS: usize = 4_000_000;

/// Multi-index `(k₁, …, kₙ)` of a monomial.
pub type MultiIndex = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Standard,
    Berz,
}

/// Dense index table for monomials of total degree `≤ N` in `n` variables,
/// in graded lexicographic order (position 0 is the constant term).
pub struct JetShape {
    nvars: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    factorials: Vec<f64>,
    /// `(r, s, k)` position triples with `r + s = k`, sorted by `r`, then `s`.
    products: Vec<(usize, usize, usize)>,
    /// `k!/(r!·s!)` for each product triple.
    berz_weights: Vec<f64>,
}

impl fmt::Debug for JetShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetShape")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

impl PartialEq for JetShape {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.order == other.order
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All multi-indices of exactly `degree` over `nvars` variables, with the
/// first variable's exponent decreasing.
fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<MultiIndex> {
    if nvars == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in monomials_of_degree(nvars - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl JetShape {
    pub fn new(nvars: usize, order: usize) -> Result<Arc<JetShape>> {
        if nvars == 0 {
            return Err(Error::InvalidShape("at least one variable is required".into()));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidShape(format!(
                "truncation order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let indices: Vec<MultiIndex> = (0..=order)
            .flat_map(|d| monomials_of_degree(nvars, d))
            .collect();
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let factorials: Vec<f64> = indices
            .iter()
            .map(|k| k.iter().map(|&ki| factorial(ki)).product())
            .collect();

        let mut products = Vec::new();
        let mut berz_weights = Vec::new();
        let degree = |k: &MultiIndex| k.iter().sum::<usize>();
        for (ri, r) in indices.iter().enumerate() {
            let dr = degree(r);
            for (si, s) in indices.iter().enumerate() {
                if dr + degree(s) > order {
                    continue;
                }
                let k: MultiIndex = r.iter().zip(s).map(|(a, b)| a + b).collect();
                let ki = lookup[&k];
                products.push((ri, si, ki));
                berz_weights.push(factorials[ki] / (factorials[ri] * factorials[si]));
                if products.len() > MAX_PRODUCTS {
                    return Err(Error::InvalidShape(format!(
                        "{nvars} variables at order {order} is too large for dense jets"
                    )));
                }
            }
        }
        Ok(Arc::new(JetShape {
            nvars,
            order,
            indices,
            lookup,
            factorials,
            products,
            berz_weights,
        }))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients, `C(n + N, N)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, position: usize) -> &[usize] {
        &self.indices[position]
    }

    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, k: &[usize]) -> Result<usize> {
        if k.len() != self.nvars {
            return Err(Error::Dimension {
                what: "multi-index",
                expected: self.nvars,
                actual: k.len(),
            });
        }
        self.lookup.get(k).copied().ok_or(Error::IndexOutOfRange {
            what: "multi-index degree",
            index: k.iter().sum(),
            limit: self.order,
        })
    }

    /// `k₁!⋯kₙ!` for the monomial at `position`.
    pub fn factorial_at(&self, position: usize) -> f64 {
        self.factorials[position]
    }
}

/// An element of the truncated polynomial algebra.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<f64>,
    basis: Basis,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.shape.nvars)
            .field("order", &self.shape.order)
            .field("basis", &self.basis)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.basis == other.basis && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(shape: &Arc<JetShape>, basis: Basis) -> Jet {
        Jet {
            shape: shape.clone(),
            coeffs: vec![0.0; shape.len()],
            basis,
        }
    }

    pub fn constant(shape: &Arc<JetShape>, c: f64, basis: Basis) -> Jet {
        let mut j = Jet::zero(shape, basis);
        j.coeffs[0] = c;
        j
    }

    /// `c + Xᵢ` for the 0-based variable index `i`. Identical in both bases.
    pub fn variable(shape: &Arc<JetShape>, i: usize, c: f64, basis: Basis) -> Result<Jet> {
        if i >= shape.nvars {
            return Err(Error::IndexOutOfRange {
                what: "jet variable",
                index: i,
                limit: shape.nvars,
            });
        }
        let mut unit = vec![0; shape.nvars];
        unit[i] = 1;
        let mut j = Jet::constant(shape, c, basis);
        j.coeffs[shape.position(&unit)?] = 1.0;
        Ok(j)
    }

    /// Builds a jet from raw coefficients in shape order.
    pub fn from_coeffs(shape: &Arc<JetShape>, coeffs: Vec<f64>, basis: Basis) -> Result<Jet> {
        if coeffs.len() != shape.len() {
            return Err(Error::Dimension {
                what: "jet coefficients",
                expected: shape.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Jet {
            shape: shape.clone(),
            coeffs,
            basis,
        })
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The constant term (the function value after lifting).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.shape.position(k)?])
    }

    fn compatible(&self, other: &Jet) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch);
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            shape: self.shape.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            basis: self.basis,
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet> {
        self.compatible(other)?;
        Ok(Jet {
            shape: self.shape.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            basis: self.basis,
        })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Jet {
        self.map(|c| c * s)
    }

    pub fn neg(&self) -> Jet {
        self.map(|c| -c)
    }

    /// Product in the quotient: convolution over multi-indices with all terms
    /// of degree above `N` dropped. The Berz basis weights each term by the
    /// multinomial factor `k!/(r!·s!)`.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.compatible(other)?;
        let shape = &self.shape;
        // -0.0 is the exact additive identity, so the first product lands
        // unchanged, sign of zero included, as in dual multiplication.
        let mut out = vec![-0.0; shape.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        match self.basis {
            Basis::Standard => {
                for &(r, s, k) in &shape.products {
                    out[k] += a[r] * b[s];
                }
            }
            Basis::Berz => {
                for (&(r, s, k), &w) in shape.products.iter().zip(&shape.berz_weights) {
                    out[k] += w * a[r] * b[s];
                }
            }
        }
        Ok(Jet {
            shape: shape.clone(),
            coeffs: out,
            basis: self.basis,
        })
    }

    /// Rescales coefficients into `target`; Berz coefficient `k` is the
    /// standard coefficient times `k₁!⋯kₙ!`.
    pub fn convert_basis(&self, target: Basis) -> Jet {
        let shape = &self.shape;
        let coeffs = match (self.basis, target) {
            (from, to) if from == to => self.coeffs.clone(),
            (Basis::Standard, Basis::Berz) => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * shape.factorials[i])
                .collect(),
            _ => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / shape.factorials[i])
                .collect(),
        };
        Jet {
            shape: shape.clone(),
            coeffs,
            basis: target,
        }
    }

    /// The partial derivative of multi-index `k` represented by this jet.
    pub fn partial(&self, k: &[usize]) -> Result<f64> {
        let pos = self.shape.position(k)?;
        Ok(match self.basis {
            Basis::Standard => self.shape.factorials[pos] * self.coeffs[pos],
            Basis::Berz => self.coeffs[pos],
        })
    }

    /// All partials in shape order, paired with their multi-indices.
    pub fn partials(&self) -> Vec<(MultiIndex, f64)> {
        let berz = self.convert_basis(Basis::Berz);
        self.shape
            .indices
            .iter()
            .cloned()
            .zip(berz.coeffs)
            .collect()
    }

    /// `Σ_{k=0}^{N} (self − x)^k · table[k] / k!` with `x` the constant term.
    fn compose_taylor(&self, table: &[f64]) -> Jet {
        let order = self.shape.order;
        let mut h = self.clone();
        h.coeffs[0] -= self.coeffs[0];
        let mut result = Jet::zero(&self.shape, self.basis).map(|_| -0.0);
        result.coeffs[0] = table[0];
        let mut power = h.clone();
        for (k, &dk) in table.iter().enumerate().take(order + 1).skip(1) {
            let term = power.scale(dk / factorial(k));
            result = result.add(&term).expect("same shape");
            if k < order {
                power = power.mul(&h).expect("same shape");
            }
        }
        result
    }

    pub fn recip(&self) -> Result<Jet> {
        let x = self.value();
        if x == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.compose_taylor(&recip_derivatives(x, self.shape.order)))
    }

    pub fn powi(&self, k: i32) -> Result<Jet> {
        if k == 0 {
            return Ok(Jet::constant(&self.shape, 1.0, self.basis));
        }
        let mut acc = self.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc.mul(self)?;
        }
        if k < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }
}

/// Lifts an elementary function to jet arguments.
///
/// Arithmetic uses the algebra operations directly; unary functions use their
/// derivative tables; custom functions of several variables are supported at
/// order one through their gradient.
pub fn lift_elementary(f: &Elementary, args: &[Jet]) -> Result<Jet> {
    if args.len() != f.arity() {
        return Err(Error::Dimension {
            what: "elementary arguments",
            expected: f.arity(),
            actual: args.len(),
        });
    }
    for pair in args.windows(2) {
        pair[0].compatible(&pair[1])?;
    }
    let constants: Vec<f64> = args.iter().map(Jet::value).collect();
    f.check(&constants)?;
    let order = args[0].shape.order;
    match f {
        Elementary::Add => args[0].add(&args[1]),
        Elementary::Sub => args[0].sub(&args[1]),
        Elementary::Mul => args[0].mul(&args[1]),
        Elementary::Neg => Ok(args[0].neg()),
        Elementary::Identity => Ok(args[0].clone()),
        Elementary::Div => args[0].mul(&args[1].recip()?),
        Elementary::PowI(k) => args[0].powi(*k),
        _ if f.arity() == 1 => {
            let table = f.derivatives(constants[0], order).ok_or_else(|| {
                Error::UnsupportedOrder {
                    function: f.name().to_string(),
                    order,
                }
            })?;
            Ok(args[0].compose_taylor(&table))
        }
        _ if order == 1 => {
            let grad = f.partials(&constants);
            let mut result = Jet::constant(&args[0].shape, f.value(&constants), args[0].basis);
            for (arg, g) in args.iter().zip(grad) {
                let mut h = arg.clone();
                h.coeffs[0] = 0.0;
                result = result.add(&h.scale(g))?;
            }
            Ok(result)
        }
        _ => Err(Error::UnsupportedOrder {
            function: f.name().to_string(),
            order,
        }),
    }
}

/// Jet evaluation for the generic evaluator.
#[derive(Clone, Debug)]
pub struct JetAlgebra {
    pub shape: Arc<JetShape>,
    pub basis: Basis,
}

impl JetAlgebra {
    pub fn new(nvars: usize, order: usize, basis: Basis) -> Result<Self> {
        Ok(Self {
            shape: JetShape::new(nvars, order)?,
            basis,
        })
    }

    /// Seeds `(c₁ + X₁, …, cₙ + Xₙ)`.
    pub fn seed(&self, point: &[f64]) -> Result<Vec<Jet>> {
        if point.len() != self.shape.nvars {
            return Err(Error::Dimension {
                what: "jet seed point",
                expected: self.shape.nvars,
                actual: point.len(),
            });
        }
        point
            .iter()
            .enumerate()
            .map(|(i, &c)| Jet::variable(&self.shape, i, c, self.basis))
            .collect()
    }
}

impl Algebra for JetAlgebra {
    type Elem = Jet;

    fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.shape, c, self.basis)
    }

    fn apply(&self, f: &Elementary, args: &[Jet]) -> Result<Jet> {
        lift_elementary(f, args)
    }
}
