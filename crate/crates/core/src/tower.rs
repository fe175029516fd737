//! Lazy univariate derivative towers `(a, δa, δ²a, …)`.
//!
//! A [`Tower`] is a node in a graph of deferred rules. Entries are computed
//! on demand, in order, and cached in the node, so asking for `k` entries
//! costs each node at most `k` evaluations. Elementary functions are lifted
//! corecursively through the chain rule `δ f(a) = f′(a) · δa`, where `f′(a)`
//! is itself a tower that may refer back to the result (for `exp`, `f′ = f`).
//!
//! Towers use `Rc` and interior mutability and are confined to one thread.

use std::cell::RefCell;
use std::fmt;
use std::rc::{Rc, Weak};

use crate::error::{Error, Result};
use crate::scalar::{Algebra, Elementary};

struct Node {
    rule: Rule,
    cache: RefCell<Vec<f64>>,
}

#[derive(Clone)]
enum Link {
    Strong(Rc<Node>),
    /// Back-reference to an enclosing node, which keeps this one alive.
    Back(Weak<Node>),
}

enum Rule {
    Const(f64),
    /// `(c, slope, 0, 0, …)`.
    Linear(f64, f64),
    Add(Link, Link),
    Sub(Link, Link),
    Neg(Link),
    Mul(Link, Link),
    Div(Link, Link),
    Shift(Link),
    /// Entry 0 is `head`; entry `n + 1` is entry `n` of `deriv · δ(arg)`.
    Chain { head: f64, arg: Link, deriv: Link },
}

/// A lazily evaluated derivative sequence.
#[derive(Clone)]
pub struct Tower(Rc<Node>);

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

impl Link {
    fn entry(&self, n: usize) -> f64 {
        match self {
            Link::Strong(node) => node.entry(n),
            Link::Back(weak) => weak
                .upgrade()
                .expect("back-reference outlives its tower")
                .entry(n),
        }
    }
}

impl Node {
    fn new(rule: Rule) -> Rc<Node> {
        Rc::new(Node {
            rule,
            cache: RefCell::new(Vec::new()),
        })
    }

    fn entry(&self, n: usize) -> f64 {
        loop {
            let len = self.cache.borrow().len();
            if len > n {
                return self.cache.borrow()[n];
            }
            let v = self.compute(len);
            let mut cache = self.cache.borrow_mut();
            if cache.len() == len {
                cache.push(v);
            }
        }
    }

    /// Entries `0..n` must already be cached.
    fn cached(&self, k: usize) -> f64 {
        self.cache.borrow()[k]
    }

    fn compute(&self, n: usize) -> f64 {
        match &self.rule {
            Rule::Const(c) => {
                if n == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Rule::Linear(c, slope) => match n {
                0 => *c,
                1 => *slope,
                _ => 0.0,
            },
            Rule::Add(a, b) => a.entry(n) + b.entry(n),
            Rule::Sub(a, b) => a.entry(n) - b.entry(n),
            Rule::Neg(a) => -a.entry(n),
            Rule::Mul(a, b) => leibniz(n, |k| a.entry(k), |k| b.entry(k)),
            Rule::Div(a, b) => {
                let row = binomial_row(n);
                let mut acc = a.entry(n);
                for (k, c) in row.iter().enumerate().take(n) {
                    acc -= c * self.cached(k) * b.entry(n - k);
                }
                acc / b.entry(0)
            }
            Rule::Shift(a) => a.entry(n + 1),
            Rule::Chain { head, arg, deriv } => {
                if n == 0 {
                    *head
                } else {
                    leibniz(n - 1, |k| deriv.entry(k), |k| arg.entry(k + 1))
                }
            }
        }
    }
}

/// Entry `n` of a product: `Σ_k C(n,k) a_k b_{n−k}`.
fn leibniz(n: usize, a: impl Fn(usize) -> f64, b: impl Fn(usize) -> f64) -> f64 {
    binomial_row(n)
        .iter()
        .enumerate()
        .map(|(k, c)| c * a(k) * b(n - k))
        .sum()
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tower")
            .field("computed", &*self.0.cache.borrow())
            .finish_non_exhaustive()
    }
}

impl Tower {
    fn from_rule(rule: Rule) -> Tower {
        Tower(Node::new(rule))
    }

    fn link(&self) -> Link {
        Link::Strong(self.0.clone())
    }

    /// `(c, 0, 0, …)`.
    pub fn constant(c: f64) -> Tower {
        Tower::from_rule(Rule::Const(c))
    }

    /// The identity seeded at `c`: `(c, 1, 0, …)`.
    pub fn variable(c: f64) -> Tower {
        Tower::seeded(c, 1.0)
    }

    /// `t ↦ c + slope·t`, i.e. `(c, slope, 0, …)`.
    pub fn seeded(c: f64, slope: f64) -> Tower {
        Tower::from_rule(Rule::Linear(c, slope))
    }

    /// Entry `n`, the `n`-th derivative.
    pub fn entry(&self, n: usize) -> f64 {
        self.0.entry(n)
    }

    pub fn head(&self) -> f64 {
        self.entry(0)
    }

    /// The first `k` entries.
    pub fn take(&self, k: usize) -> Vec<f64> {
        (0..k).map(|n| self.entry(n)).collect()
    }

    /// Number of entries computed so far in this node.
    pub fn computed_len(&self) -> usize {
        self.0.cache.borrow().len()
    }

    pub fn add(&self, other: &Tower) -> Tower {
        Tower::from_rule(Rule::Add(self.link(), other.link()))
    }

    pub fn sub(&self, other: &Tower) -> Tower {
        Tower::from_rule(Rule::Sub(self.link(), other.link()))
    }

    pub fn neg(&self) -> Tower {
        Tower::from_rule(Rule::Neg(self.link()))
    }

    pub fn mul(&self, other: &Tower) -> Tower {
        Tower::from_rule(Rule::Mul(self.link(), other.link()))
    }

    /// The unique `q` with `q · other = self`, solved entry by entry from
    /// the Leibniz relation.
    pub fn div(&self, other: &Tower) -> Result<Tower> {
        if other.head() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Tower::from_rule(Rule::Div(self.link(), other.link())))
    }

    /// The shift `df(a, δa, δ²a, …) = (δa, δ²a, …)`.
    pub fn df(&self) -> Tower {
        Tower::from_rule(Rule::Shift(self.link()))
    }

    pub fn powi(&self, k: i32) -> Result<Tower> {
        if k == 0 {
            return Ok(Tower::constant(1.0));
        }
        let mut acc = self.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            Tower::constant(1.0).div(&acc)
        } else {
            Ok(acc)
        }
    }

    /// `f(self)` where `f′(self)` is built from the result itself.
    fn chain(&self, head: f64, deriv: impl FnOnce(&Weak<Node>) -> Link) -> Tower {
        Tower(Rc::new_cyclic(|me| Node {
            rule: Rule::Chain {
                head,
                arg: self.link(),
                deriv: deriv(me),
            },
            cache: RefCell::new(Vec::new()),
        }))
    }

    /// `sin(self)` and `cos(self)`, each the other's derivative up to sign;
    /// `want_sin` selects which one owns the pair.
    fn sin_cos(&self, want_sin: bool) -> Tower {
        let x = self.head();
        let arg = self.link();
        let (sin, cos) = (Elementary::Sin.value(&[x]), Elementary::Cos.value(&[x]));
        let (outer_head, inner_head) = if want_sin { (sin, cos) } else { (cos, sin) };
        Tower(Rc::new_cyclic(|outer| {
            let back = Link::Back(outer.clone());
            // sin' = cos, cos' = -sin
            let inner_deriv = if want_sin {
                Link::Strong(Node::new(Rule::Neg(back)))
            } else {
                back
            };
            let inner = Node::new(Rule::Chain {
                head: inner_head,
                arg: arg.clone(),
                deriv: inner_deriv,
            });
            let deriv = if want_sin {
                Link::Strong(inner)
            } else {
                Link::Strong(Node::new(Rule::Neg(Link::Strong(inner))))
            };
            Node {
                rule: Rule::Chain {
                    head: outer_head,
                    arg,
                    deriv,
                },
                cache: RefCell::new(Vec::new()),
            }
        }))
    }

    /// Lifts an elementary function; only univariate catalogue functions and
    /// arithmetic are supported.
    pub fn lift(f: &Elementary, args: &[Tower]) -> Result<Tower> {
        if args.len() != f.arity() {
            return Err(Error::Dimension {
                what: "elementary arguments",
                expected: f.arity(),
                actual: args.len(),
            });
        }
        let heads: Vec<f64> = args.iter().map(Tower::head).collect();
        f.check(&heads)?;
        let a = &args[0];
        Ok(match f {
            Elementary::Add => a.add(&args[1]),
            Elementary::Sub => a.sub(&args[1]),
            Elementary::Mul => a.mul(&args[1]),
            Elementary::Div => a.div(&args[1])?,
            Elementary::Neg => a.neg(),
            Elementary::Identity => a.clone(),
            Elementary::PowI(k) => a.powi(*k)?,
            Elementary::Exp => a.chain(f.value(&heads), |me| Link::Back(me.clone())),
            Elementary::Sin => a.sin_cos(true),
            Elementary::Cos => a.sin_cos(false),
            Elementary::Ln => {
                let recip = Tower::constant(1.0).div(a)?;
                a.chain(f.value(&heads), |_| recip.link())
            }
            Elementary::Sqrt => a.chain(f.value(&heads), |me| {
                let half = Tower::constant(0.5).link();
                Link::Strong(Node::new(Rule::Div(half, Link::Back(me.clone()))))
            }),
            Elementary::Tan => a.chain(f.value(&heads), |me| {
                let me = Link::Back(me.clone());
                let square = Node::new(Rule::Mul(me.clone(), me));
                Link::Strong(Node::new(Rule::Add(
                    Tower::constant(1.0).link(),
                    Link::Strong(square),
                )))
            }),
            Elementary::Custom(c) => {
                return Err(Error::Unsupported {
                    function: c.name().to_string(),
                    algebra: "towers",
                })
            }
        })
    }
}

/// Tower evaluation for the generic evaluator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Towers;

impl Algebra for Towers {
    type Elem = Tower;

    fn constant(&self, c: f64) -> Tower {
        Tower::constant(c)
    }

    fn apply(&self, f: &Elementary, args: &[Tower]) -> Result<Tower> {
        Tower::lift(f, args)
    }
}
