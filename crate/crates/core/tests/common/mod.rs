//! Generators and independent oracles shared by the integration tests and the
//! acceptance harness.

#![allow(dead_code)]

use std::collections::BTreeMap;

use adkit::{parse, Duals, Elementary, FunctionBuilder, FunctionDef, NodeId};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod criteria;
pub mod nested;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

pub fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A random definition with its evaluation point and seeds.
#[derive(Clone, Debug)]
pub struct Case {
    pub def: FunctionDef,
    pub point: Vec<f64>,
    pub dir: Vec<f64>,
    pub cov: Vec<f64>,
}

/// Largest primal and tangent magnitudes accepted by the generators.
pub const MAX_PRIMAL: f64 = 1e4;
pub const MAX_TANGENT: f64 = 1e6;

/// A random DAG over every elementary in the standard catalogue plus
/// arithmetic, with `n ≤ 4`, `m ≤ 3` and `μ ≤ 30`. Arguments to `ln`,
/// `sqrt`, division and negative powers are shifted squares, `tan` reads a
/// sine, so every point is in the domain; cases whose values overflow the
/// magnitude bounds are resampled.
pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let def = random_def(rng, n, m);
        if def.mu() > 30 {
            continue;
        }
        let point = uniform(rng, -1.5, 1.5, n);
        let dir = uniform(rng, -1.0, 1.0, n);
        let cov = uniform(rng, -1.0, 1.0, m);
        if bounded(&def, &point, &dir) {
            return Case {
                def,
                point,
                dir,
                cov,
            };
        }
    }
}

pub fn bounded(def: &FunctionDef, point: &[f64], dir: &[f64]) -> bool {
    let inputs: Vec<adkit::Dual> = point
        .iter()
        .zip(dir)
        .map(|(&c, &t)| adkit::Dual::new(c, t))
        .collect();
    match def.eval_nodes(&inputs, &Duals) {
        Ok(values) => values.values.iter().flatten().all(|d| {
            d.primal.is_finite()
                && d.tangent.is_finite()
                && d.primal.abs() <= MAX_PRIMAL
                && d.tangent.abs() <= MAX_TANGENT
        }),
        Err(_) => false,
    }
}

fn random_def(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FunctionDef {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut b = FunctionBuilder::new("f", names);
    let mut pool: Vec<NodeId> = (0..n).map(|i| b.var(i).unwrap()).collect();
    let steps = rng.gen_range(1..=18);
    for _ in 0..steps {
        let a = pick(rng, &pool);
        let c = if rng.gen_bool(0.15) {
            b.constant(rng.gen_range(-2.0..2.0))
        } else {
            pick(rng, &pool)
        };
        let node = match rng.gen_range(0..12) {
            0 => b.apply(Elementary::Add, &[a, c]),
            1 => b.apply(Elementary::Sub, &[a, c]),
            2 => b.apply(Elementary::Mul, &[a, c]),
            3 => {
                let d = shifted_square(&mut b, c, 1.0);
                b.apply(Elementary::Div, &[a, d])
            }
            4 => b.apply(Elementary::Neg, &[a]),
            5 => {
                let k = rng.gen_range(-2..=3);
                let base = if k < 0 { shifted_square(&mut b, a, 1.0) } else { a };
                b.apply(Elementary::PowI(k), &[base])
            }
            6 => b.apply(Elementary::Exp, &[a]),
            7 => b.apply(Elementary::Sin, &[a]),
            8 => b.apply(Elementary::Cos, &[a]),
            9 => {
                let s = b.apply(Elementary::Sin, &[a]).unwrap();
                b.apply(Elementary::Tan, &[s])
            }
            10 => {
                let s = shifted_square(&mut b, a, 0.5);
                b.apply(Elementary::Ln, &[s])
            }
            _ => {
                let s = shifted_square(&mut b, a, 0.5);
                b.apply(Elementary::Sqrt, &[s])
            }
        };
        pool.push(node.unwrap());
    }
    let mut outputs = vec![*pool.last().unwrap()];
    while outputs.len() < m {
        outputs.push(pool[rng.gen_range(0..pool.len())]);
    }
    b.finish(outputs).unwrap()
}

fn pick(rng: &mut ChaCha8Rng, pool: &[NodeId]) -> NodeId {
    if rng.gen_bool(0.5) {
        pool[pool.len() - 1]
    } else {
        pool[rng.gen_range(0..pool.len())]
    }
}

/// `a·a + shift`.
fn shifted_square(b: &mut FunctionBuilder, a: NodeId, shift: f64) -> NodeId {
    let sq = b.apply(Elementary::Mul, &[a, a]).unwrap();
    let k = b.constant(shift);
    b.apply(Elementary::Add, &[sq, k]).unwrap()
}

/// Source text of a random composition of catalogue functions in the given
/// variables, nested to at most `depth`.
pub fn random_composition_source(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> String {
    let body = composition(rng, vars, depth);
    format!("f({}) = {body}", vars.join(", "))
}

fn composition(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.15) {
        let v = vars[rng.gen_range(0..vars.len())];
        return match rng.gen_range(0..3) {
            0 => v.to_string(),
            1 => format!("({v} + {:.3})", rng.gen_range(-1.0..1.0)),
            _ => format!("{:.3} * {v}", rng.gen_range(-1.5..1.5)),
        };
    }
    let inner = composition(rng, vars, depth - 1);
    match rng.gen_range(0..11) {
        0 => format!("sin({inner})"),
        1 => format!("cos({inner})"),
        2 => format!("exp(0.5 * {inner})"),
        3 => format!("ln(1.5 + sin({inner}))"),
        4 => format!("sqrt(2 + cos({inner}))"),
        5 => format!("tan(0.7 * sin({inner}))"),
        6 => format!("({inner})^{}", rng.gen_range(2..=3)),
        7 => format!("({inner}) * ({})", composition(rng, vars, depth - 1)),
        8 => format!("({inner}) + ({})", composition(rng, vars, depth - 1)),
        9 => format!("({inner}) / (2 + sin({}))", composition(rng, vars, depth - 1)),
        _ => format!("-({inner})"),
    }
}

/// A parsed composition whose values stay within the magnitude bounds at
/// the returned point.
pub fn random_composition(rng: &mut ChaCha8Rng, nvars: usize, depth: usize) -> (FunctionDef, Vec<f64>) {
    let names: Vec<String> = (1..=nvars).map(|i| format!("x{i}")).collect();
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    loop {
        let def = parse(&random_composition_source(rng, &vars, depth)).unwrap();
        let point = uniform(rng, -1.0, 1.0, nvars);
        let ones = vec![1.0; nvars];
        if bounded(&def, &point, &ones) {
            return (def, point);
        }
    }
}

/// Real-valued evaluation.
pub fn eval(def: &FunctionDef, x: &[f64]) -> Vec<f64> {
    def.eval_generic(x, &adkit::Reals).unwrap()
}

/// Central difference `(f(c + h·d) − f(c − h·d)) / 2h` for every output.
pub fn central_difference(def: &FunctionDef, c: &[f64], d: &[f64], h: f64) -> Vec<f64> {
    let shift = |s: f64| -> Vec<f64> { c.iter().zip(d).map(|(x, v)| x + s * h * v).collect() };
    let plus = eval(def, &shift(1.0));
    let minus = eval(def, &shift(-1.0));
    plus.iter().zip(minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
}

/// `k`-th central difference `Σ_j (−1)^j C(k,j) g(x + (k/2 − j)h) / h^k`,
/// extrapolated once (Richardson, `h` and `h/2`) to fourth order.
pub fn richardson_derivative(g: impl Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let central = |h: f64| {
        let mut acc = 0.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let offset = (k as f64 / 2.0 - j as f64) * h;
            acc += sign * binomial(k, j) * g(x + offset);
        }
        acc / h.powi(k as i32)
    };
    if k == 0 {
        return g(x);
    }
    let coarse = central(h);
    let fine = central(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Truncated polynomial in sparse form, keyed by exponent vector.
pub type Poly = BTreeMap<Vec<usize>, f64>;

/// Schoolbook product of two polynomials, dropping terms above total
/// degree `order`.
pub fn naive_poly_mul(a: &Poly, b: &Poly, order: usize) -> Poly {
    let mut out = Poly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k: Vec<usize> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            if k.iter().sum::<usize>() <= order {
                *out.entry(k).or_insert(0.0) += ca * cb;
            }
        }
    }
    out
}

/// Every exponent vector in `nvars` variables of total degree at most `order`.
pub fn exponents(nvars: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..nvars {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                let used: usize = prefix.iter().sum();
                (0..=order - used).map(move |e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out
}

/// Mixed partial `∂^k f₁(c)` from the tensor product of central stencils,
/// extrapolated once (Richardson, `h` and `h/2`).
pub fn mixed_difference(def: &FunctionDef, c: &[f64], k: &[usize], h: f64) -> f64 {
    let order: usize = k.iter().sum();
    let stencil = |h: f64| {
        let mut offsets: Vec<(Vec<f64>, f64)> = vec![(c.to_vec(), 1.0)];
        for (i, &ki) in k.iter().enumerate() {
            offsets = offsets
                .into_iter()
                .flat_map(|(x, w)| {
                    (0..=ki).map(move |j| {
                        let mut x = x.clone();
                        x[i] += (ki as f64 / 2.0 - j as f64) * h;
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        (x, w * sign * binomial(ki, j))
                    })
                })
                .collect();
        }
        let sum: f64 = offsets.iter().map(|(x, w)| w * eval(def, x)[0]).sum();
        sum / h.powi(order as i32)
    };
    if order == 0 {
        return eval(def, c)[0];
    }
    (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0
}
