//! Source text for a [`FunctionDef`], with `let` bindings for every node that
//! is used more than once.

use std::collections::HashMap;

use super::{FunctionDef, Node, NodeId, Scheduled};
use crate::scalar::Elementary;

const SUM: u8 = 0;
const PROD: u8 = 1;
const UNARY: u8 = 2;
const ATOM: u8 = 3;

pub(super) fn unparse(def: &FunctionDef) -> String {
    let mut uses: HashMap<NodeId, usize> = HashMap::new();
    for id in def.reachable() {
        if let Node::Apply(_, args) = def.node(id) {
            for a in args {
                *uses.entry(*a).or_default() += 1;
            }
        }
    }
    for o in def.outputs() {
        *uses.entry(*o).or_default() += 1;
    }

    let mut printer = Printer {
        def,
        names: HashMap::new(),
    };
    let mut out = format!("{}({}) = ", def.name(), def.var_names().join(", "));
    let mut counter = 0;
    for step in def.schedule() {
        let Scheduled::Node(id) = step else { continue };
        if uses.get(&id).copied().unwrap_or(0) < 2 {
            continue;
        }
        let name = loop {
            counter += 1;
            let candidate = format!("t{counter}");
            if !def.var_names().contains(&candidate) {
                break candidate;
            }
        };
        let text = printer.expr(id, SUM, false);
        out.push_str(&format!("let {name} = {text} in "));
        printer.names.insert(id, name);
    }
    let bodies: Vec<String> = def
        .outputs()
        .iter()
        .map(|&o| printer.expr(o, SUM, true))
        .collect();
    if bodies.len() == 1 {
        out.push_str(&bodies[0]);
    } else {
        out.push_str(&format!("({})", bodies.join(", ")));
    }
    out
}

struct Printer<'a> {
    def: &'a FunctionDef,
    names: HashMap<NodeId, String>,
}

impl Printer<'_> {
    fn expr(&self, id: NodeId, level: u8, use_name: bool) -> String {
        if use_name {
            if let Some(name) = self.names.get(&id) {
                return name.clone();
            }
        }
        let (text, own) = match self.def.node(id) {
            Node::Variable(i) => (self.def.var_names()[*i].clone(), ATOM),
            Node::Constant(c) if c.is_sign_negative() => (format!("-{:?}", -c), UNARY),
            Node::Constant(c) => (format!("{c:?}"), ATOM),
            Node::Apply(f, args) => {
                let arg = |k: usize, l: u8| self.expr(args[k], l, true);
                match f {
                    Elementary::Add => (format!("{} + {}", arg(0, SUM), arg(1, PROD)), SUM),
                    Elementary::Sub => (format!("{} - {}", arg(0, SUM), arg(1, PROD)), SUM),
                    Elementary::Mul => (format!("{} * {}", arg(0, PROD), arg(1, UNARY)), PROD),
                    Elementary::Div => (format!("{} / {}", arg(0, PROD), arg(1, UNARY)), PROD),
                    Elementary::Neg => (format!("-{}", arg(0, UNARY)), UNARY),
                    Elementary::PowI(k) => (format!("{}^{k}", arg(0, ATOM)), UNARY),
                    other => {
                        let list: Vec<String> = (0..args.len()).map(|k| arg(k, SUM)).collect();
                        (format!("{}({})", other.name(), list.join(", ")), ATOM)
                    }
                }
            }
        };
        if own < level {
            format!("({text})")
        } else {
            text
        }
    }
}
