//! One check per acceptance criterion. Each returns a short summary on
//! success and a description of the first failure otherwise.

use std::time::{Duration, Instant};

use adkit::scalar::{lift_elementary, taylor_first_degree};
use adkit::trace::Derivatives;
use adkit::{
    cost_compare, forward_directional, parse, reverse_gradient, Basis, Dual, Elementary, Jet,
    JetAlgebra, JetShape, Scenario, SeedSpec, StateProgram, Tower, Towers,
};
use rand::Rng;

use super::*;

pub type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn timed(limit: Duration, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let summary = body()?;
    let elapsed = start.elapsed();
    ensure!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
    Ok(format!("{summary} in {elapsed:.2?}"))
}

/// Forward mode on `x₂·cos(x₁·x₁+3)` against its closed-form derivative.
pub fn dual_example() -> Outcome {
    timed(Duration::from_secs(1), || {
        let def = parse("f(x1,x2) = x2*cos(x1*x1+3)").unwrap();
        let mut rng = rng(1);
        for _ in 0..100 {
            let c = uniform(&mut rng, -3.0, 3.0, 2);
            let d = uniform(&mut rng, -3.0, 3.0, 2);
            let (_, t) = forward_directional(&def, &SeedSpec::forward(c.clone(), d.clone())).unwrap();
            let s = c[0] * c[0] + 3.0;
            let expected = -2.0 * c[0] * c[1] * s.sin() * d[0] + s.cos() * d[1];
            ensure!(close(t[0], expected, 1e-12), "at {c:?} dir {d:?}: {} vs {expected}", t[0]);
        }
        Ok("100 points".into())
    })
}

/// The dense trace of `(exp(x₁)sin(x₁+x₂), x₂)` against the displayed final
/// state, tangent state and projected derivative.
pub fn two_output_trace() -> Outcome {
    let def = parse("f(x1,x2) = (exp(x1)*sin(x1+x2), x2)").unwrap();
    let program = StateProgram::compile(&def);
    ensure!(program.dim() == 7, "state dimension {}", program.dim());
    let mut rng = rng(2);
    for _ in 0..100 {
        let c = uniform(&mut rng, -2.0, 2.0, 2);
        let x = uniform(&mut rng, -2.0, 2.0, 2);
        let (y, record) = program.forward_derivative_trace(&c, &x).unwrap();
        let (c1, c2, x1, x2) = (c[0], c[1], x[0], x[1]);
        let v5 = [c1, c2, c1.exp(), c1 + c2, (c1 + c2).sin(), c1.exp() * (c1 + c2).sin(), c2];
        let dv5 = [
            x1,
            x2,
            c1.exp() * x1,
            x1 + x2,
            (c1 + c2).cos() * (x1 + x2),
            (c1 + c2).sin() * c1.exp() * x1 + c1.exp() * (c1 + c2).cos() * (x1 + x2),
            x2,
        ];
        let Derivatives::Forward(tangents) = &record.derivatives else {
            return Err("no forward derivatives recorded".into());
        };
        ensure!(record.states.len() == 6 && tangents.len() == 6, "expected five steps");
        ensure!(all_close(record.states[5].as_slice(), &v5, 1e-12), "v5 {:?} vs {v5:?}", record.states[5]);
        ensure!(all_close(tangents[5].as_slice(), &dv5, 1e-12), "v'5 {:?} vs {dv5:?}", tangents[5]);
        let jx = [
            ((c1 + c2).sin() * c1.exp() + c1.exp() * (c1 + c2).cos()) * x1 + c1.exp() * (c1 + c2).cos() * x2,
            x2,
        ];
        ensure!(all_close(y.as_slice(), &jx, 1e-12), "P_Y v'5 {:?} vs {jx:?}", y);
    }
    Ok("100 points".into())
}

/// Reverse mode on `(x, exp(x)sin(x))`.
pub fn reverse_example() -> Outcome {
    let def = parse("f(x) = (x, exp(x)*sin(x))").unwrap();
    let (_, g) = reverse_gradient(&def, &SeedSpec::reverse(vec![5.0], vec![1.0, 1.0])).unwrap();
    let five = 5f64;
    let expected = 1.0 + five.exp() * (five.sin() + five.cos());
    ensure!(close(g[0], expected, 1e-12), "c=5: {} vs {expected}", g[0]);
    let mut rng = rng(3);
    for _ in 0..100 {
        let c: f64 = rng.gen_range(-5.0..5.0);
        let y = uniform(&mut rng, -2.0, 2.0, 2);
        let (_, g) = reverse_gradient(&def, &SeedSpec::reverse(vec![c], y.clone())).unwrap();
        let expected = y[0] + y[1] * c.exp() * (c.sin() + c.cos());
        ensure!(close(g[0], expected, 1e-12), "c={c} ybar={y:?}: {} vs {expected}", g[0]);
    }
    Ok(format!("c=5 gives {:?}; 100 random seeds", g[0]))
}

/// Exact operation counts for all three scenarios, `n = 1..=50`.
pub fn cost_table() -> Outcome {
    timed(Duration::from_secs(5), || {
        for n in 1..=50u64 {
            let chain = cost_compare(Scenario::Chain, n as usize).unwrap();
            ensure!(chain.symbolic == n * (n + 1) / 2 && chain.ad == 2 * n, "chain n={n}: {chain:?}");
            let product = cost_compare(Scenario::Product, n as usize).unwrap();
            ensure!(product.symbolic == n * n && product.ad == 2 * n, "product n={n}: {product:?}");
            let shared = cost_compare(Scenario::Shared, n as usize).unwrap();
            ensure!(shared.ad == 2 * n + 2, "shared n={n}: {shared:?}");
            ensure!(
                shared.symbolic == 2 * n + 1 && shared.symbolic_unfactored == Some(3 * n),
                "shared symbolic variants n={n}: {shared:?}"
            );
            for r in [&chain, &product, &shared] {
                ensure!(
                    close(r.symbolic_derivative, r.ad_derivative, 1e-10),
                    "{} n={n}: symbolic f' {} vs AD f' {}",
                    r.scenario,
                    r.symbolic_derivative,
                    r.ad_derivative
                );
            }
        }
        Ok("150 rows exact".into())
    })
}

/// Engine forward and reverse against the dense trace products, plus
/// duality, over 500 random definitions.
pub fn oracle_equivalence() -> Outcome {
    let mut rng = rng(5);
    let mut max_mu = 0;
    for i in 0..500 {
        let case = random_case(&mut rng);
        max_mu = max_mu.max(case.def.mu());
        let program = StateProgram::compile(&case.def);
        let label = || format!("case {i}: {}", case.def);

        let (_, tangent) =
            forward_directional(&case.def, &SeedSpec::forward(case.point.clone(), case.dir.clone())).unwrap();
        let dense = program.forward_derivative(&case.point, &case.dir).unwrap();
        ensure!(all_close(&tangent, dense.as_slice(), 1e-12), "{}: forward {tangent:?} vs {dense:?}", label());

        let (_, grad) =
            reverse_gradient(&case.def, &SeedSpec::reverse(case.point.clone(), case.cov.clone())).unwrap();
        let dense = program.reverse_derivative(&case.point, &case.cov).unwrap();
        ensure!(all_close(&grad, dense.as_slice(), 1e-12), "{}: reverse {grad:?} vs {dense:?}", label());

        let lhs = dot(&case.cov, &tangent);
        let rhs = dot(&grad, &case.dir);
        ensure!(close(lhs, rhs, 1e-10), "{}: duality {lhs} vs {rhs}", label());
    }
    Ok(format!("500 definitions, largest mu {max_mu}"))
}

/// Forward and reverse first derivatives against central differences.
pub fn finite_differences() -> Outcome {
    const H: f64 = 1e-6;
    let mut rng = rng(6);
    for i in 0..200 {
        let nvars = rng.gen_range(1..=3);
        let (def, point) = random_composition(&mut rng, nvars, 4);
        let dir = uniform(&mut rng, -1.0, 1.0, nvars);
        let (_, tangent) = forward_directional(&def, &SeedSpec::forward(point.clone(), dir.clone())).unwrap();
        let fd = central_difference(&def, &point, &dir, H);
        ensure!(all_close(&tangent, &fd, 1e-5), "case {i} {def}: forward {tangent:?} vs fd {fd:?}");

        let (_, grad) = reverse_gradient(&def, &SeedSpec::reverse(point.clone(), vec![1.0])).unwrap();
        for j in 0..nvars {
            let mut e = vec![0.0; nvars];
            e[j] = 1.0;
            let fd = central_difference(&def, &point, &e, H)[0];
            ensure!(close(grad[j], fd, 1e-5), "case {i} {def}: d/dx{} reverse {} vs fd {fd}", j + 1, grad[j]);
        }
    }
    Ok("200 compositions".into())
}

/// Jets against towers, finite differences, the schoolbook product and
/// dual numbers.
pub fn jets() -> Outcome {
    let mut rng = rng(7);
    for i in 0..100 {
        let order = rng.gen_range(1..=6);
        let (def, point) = random_composition(&mut rng, 1, 3);
        let c = point[0];
        let tower = def.eval_generic(&[Tower::variable(c)], &Towers).unwrap().remove(0);
        for basis in [Basis::Standard, Basis::Berz] {
            let alg = JetAlgebra::new(1, order, basis).unwrap();
            let jet = def.eval_generic(&alg.seed(&point).unwrap(), &alg).unwrap().remove(0);
            for k in 0..=order {
                let p = jet.partial(&[k]).unwrap();
                ensure!(close(p, tower.entry(k), 1e-9), "case {i} {def} at {c}: order {k} jet {p} vs tower {}", tower.entry(k));
            }
        }
        let alg = JetAlgebra::new(1, order, Basis::Berz).unwrap();
        let jet = def.eval_generic(&alg.seed(&point).unwrap(), &alg).unwrap().remove(0);
        for k in 1..=order {
            let h = f64::EPSILON.powf(1.0 / (k as f64 + 4.0));
            let fd = richardson_derivative(|x| eval(&def, &[x])[0], c, k, h);
            let p = jet.partial(&[k]).unwrap();
            ensure!(close(p, fd, 1e-3), "case {i} {def} at {c}: order {k} jet {p} vs fd {fd}");
        }
    }

    for i in 0..300 {
        let n = rng.gen_range(1..=3);
        let order = rng.gen_range(1..=4);
        let shape = JetShape::new(n, order).unwrap();
        let mut random_int_jet = || {
            let coeffs: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-5..=5) as f64).collect();
            Jet::from_coeffs(&shape, coeffs, Basis::Standard).unwrap()
        };
        let (a, b) = (random_int_jet(), random_int_jet());
        let to_poly = |j: &Jet| -> Poly {
            (0..shape.len())
                .map(|p| (shape.multi_index(p).to_vec(), j.coeffs()[p]))
                .collect()
        };
        let expected = naive_poly_mul(&to_poly(&a), &to_poly(&b), order);
        let product = a.mul(&b).unwrap();
        for k in exponents(n, order) {
            let got = product.coeff(&k).unwrap();
            let want = expected.get(&k).copied().unwrap_or(0.0);
            ensure!(got == want, "integer jet case {i}: coefficient {k:?} {got} vs {want}");
        }
    }

    let shape = JetShape::new(1, 1).unwrap();
    for i in 0..300 {
        let case = random_case(&mut rng);
        let (value, tangent) =
            forward_directional(&case.def, &SeedSpec::forward(case.point.clone(), case.dir.clone())).unwrap();
        for basis in [Basis::Standard, Basis::Berz] {
            let alg = JetAlgebra::new(1, 1, basis).unwrap();
            let inputs: Vec<Jet> = case
                .point
                .iter()
                .zip(&case.dir)
                .map(|(&c, &d)| Jet::from_coeffs(&shape, vec![c, d], basis).unwrap())
                .collect();
            let out = case.def.eval_generic(&inputs, &alg).unwrap();
            for (j, jet) in out.iter().enumerate() {
                let (v, t) = (jet.coeffs()[0], jet.coeffs()[1]);
                ensure!(
                    v.to_bits() == value[j].to_bits() && t.to_bits() == tangent[j].to_bits(),
                    "N=1 case {i} {} output {j}: jet ({v:?}, {t:?}) vs dual ({:?}, {:?})",
                    case.def,
                    value[j],
                    tangent[j]
                );
            }
        }
    }
    Ok("100 tower/fd comparisons, 300 integer products, 300 N=1 definitions".into())
}

/// A random catalogue elementary with in-domain arguments.
fn random_elementary(rng: &mut rand_chacha::ChaCha8Rng) -> (Elementary, Vec<f64>) {
    let f = match rng.gen_range(0..12) {
        0 => Elementary::Add,
        1 => Elementary::Sub,
        2 => Elementary::Mul,
        3 => Elementary::Div,
        4 => Elementary::Neg,
        5 => Elementary::PowI(rng.gen_range(-4..=5)),
        6 => Elementary::Exp,
        7 => Elementary::Ln,
        8 => Elementary::Sqrt,
        9 => Elementary::Sin,
        10 => Elementary::Cos,
        _ => Elementary::Tan,
    };
    let args = match f {
        Elementary::Ln | Elementary::Sqrt => vec![rng.gen_range(0.05..5.0)],
        Elementary::Tan => vec![rng.gen_range(-1.4..1.4)],
        Elementary::Div => vec![rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0) * sign(rng)],
        Elementary::PowI(_) => vec![rng.gen_range(0.2..2.0) * sign(rng)],
        _ => uniform(rng, -3.0, 3.0, f.arity()),
    };
    (f, args)
}

fn sign(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// The first-degree Taylor polynomial, expanded through explicit `ε`
/// products, against the dual lift.
pub fn taylor_identity() -> Outcome {
    let mut rng = rng(8);
    let mut exact = 0;
    for i in 0..100 {
        let (f, primals) = random_elementary(&mut rng);
        let args: Vec<Dual> = primals.iter().map(|&p| Dual::new(p, rng.gen_range(-2.0..2.0))).collect();
        let taylor = taylor_first_degree(&f, &args).unwrap();
        let lift = lift_elementary(&f, &args).unwrap();
        ensure!(
            close(taylor.primal, lift.primal, 1e-12) && close(taylor.tangent, lift.tangent, 1e-12),
            "case {i} {f} at {args:?}: taylor {taylor:?} vs lift {lift:?}"
        );
        exact += usize::from(taylor == lift);
    }
    Ok(format!("100 functions, {exact} bit-identical"))
}

type Suite = fn(u32) -> Result<(), String>;

/// The property suites at 1000 cases each.
pub fn law_suites() -> Outcome {
    let suites: [(&str, Suite); 5] = [
        ("dual ring", laws::dual_ring),
        ("nilpotency", laws::nilpotency),
        ("tower Leibniz", laws::tower_leibniz),
        ("tower product rule", laws::tower_product_rule),
        ("jet basis round trip", laws::jet_basis_round_trip),
    ];
    for (name, suite) in suites {
        suite(laws::CASES).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("5 suites x {} cases", laws::CASES))
}
