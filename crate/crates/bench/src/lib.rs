//! Fixtures shared by the benchmarks.

use adkit::{parse, FunctionDef};

/// `f(x1..xn) = sin(x1)*exp(x2) + sin(x2)*exp(x3) + … + sin(xn)*exp(x1)`,
/// one output and `n` inputs.
pub fn ring(n: usize) -> FunctionDef {
    assert!(n >= 1);
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let terms: Vec<String> = (0..n)
        .map(|i| format!("sin({})*exp({})", vars[i], vars[(i + 1) % n]))
        .collect();
    parse(&format!("f({}) = {}", vars.join(","), terms.join(" + "))).expect("fixture parses")
}

/// `f(x) = (cos(x1)*x2, cos(x2)*x3, …, cos(xn)*x1)`, `n` inputs and `n` outputs.
pub fn square(n: usize) -> FunctionDef {
    assert!(n >= 1);
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let outs: Vec<String> = (0..n)
        .map(|i| format!("cos({})*{}", vars[i], vars[(i + 1) % n]))
        .collect();
    parse(&format!("f({}) = ({})", vars.join(","), outs.join(", "))).expect("fixture parses")
}

/// A point with distinct, moderate components.
pub fn point(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.1 + 0.37 * i as f64 % 1.3).collect()
}
