//! Graphviz export of the computational graph.

use std::fmt::Write;

use super::{FunctionDef, Node, NodeId, Scheduled};
use crate::error::{Error, Result};
use crate::scalar::{Dual, Duals};

/// Primal (blue) and tangent (red) labels for every drawn node.
#[derive(Clone, Debug)]
pub struct DotAnnotations {
    /// Indexed by node id.
    pub nodes: Vec<Option<Dual>>,
    /// One entry per output.
    pub outputs: Vec<Dual>,
}

/// Forward-mode values of every node at `point` in direction `dir`.
pub fn annotate(def: &FunctionDef, point: &[f64], dir: &[f64]) -> Result<DotAnnotations> {
    if dir.len() != point.len() {
        return Err(Error::Dimension {
            what: "direction",
            expected: point.len(),
            actual: dir.len(),
        });
    }
    let inputs: Vec<Dual> = point.iter().zip(dir).map(|(&c, &t)| Dual::new(c, t)).collect();
    let values = def.eval_nodes(&inputs, &Duals)?;
    Ok(DotAnnotations {
        nodes: values.values,
        outputs: values.outputs,
    })
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(text: &str, value: Option<Dual>) -> String {
    match value {
        None => format!("label={}", quoted(text)),
        Some(d) => format!(
            "label=<{}<br/><font color=\"blue\">{:?}</font><br/><font color=\"red\">{:?}</font>>",
            html(text),
            d.primal,
            d.tangent
        ),
    }
}

/// DOT digraph with one box per input, constant and elementary transition,
/// and edges from arguments to consumers in evaluation order. Output nodes
/// are drawn with a double border.
///
/// In functions with several outputs, an output that is a bare variable or
/// constant is drawn as its own `copy` node so that the boxes match the
/// state-space slots. A single-output function that is just its input is
/// drawn as that one input node.
pub fn to_dot(def: &FunctionDef, annotations: Option<&DotAnnotations>) -> String {
    let mut out = String::from("digraph {\n  node [shape=box];\n");
    let mut drawn = vec![false; def.nodes().len()];
    let is_output = |id: NodeId| def.outputs().contains(&id);
    let node_value = |id: NodeId| annotations.and_then(|a| a.nodes[id.0]);
    let copies_drawn = def.m() > 1;

    let emit = |id: NodeId, out: &mut String, drawn: &mut Vec<bool>| {
        if drawn[id.0] {
            return;
        }
        drawn[id.0] = true;
        let border = match def.node(id) {
            Node::Apply(..) if is_output(id) => ", peripheries=2",
            Node::Variable(_) | Node::Constant(_) if is_output(id) && !copies_drawn => ", peripheries=2",
            _ => "",
        };
        let _ = writeln!(
            out,
            "  n{} [{}{}];",
            id.0,
            label(&def.label(id), node_value(id)),
            border
        );
    };

    for i in 0..def.n() {
        emit(NodeId(i), &mut out, &mut drawn);
    }
    for step in def.schedule() {
        match step {
            Scheduled::Node(id) => {
                let Node::Apply(_, args) = def.node(id) else {
                    unreachable!()
                };
                for &a in args {
                    emit(a, &mut out, &mut drawn);
                }
                emit(id, &mut out, &mut drawn);
                for a in args {
                    let _ = writeln!(out, "  n{} -> n{};", a.0, id.0);
                }
            }
            Scheduled::OutputCopy { output, source } => {
                emit(source, &mut out, &mut drawn);
                if copies_drawn {
                    let value = annotations.map(|a| a.outputs[output]);
                    let _ = writeln!(
                        out,
                        "  copy{output} [{}, peripheries=2];",
                        label("copy", value)
                    );
                    let _ = writeln!(out, "  n{} -> copy{output};", source.0);
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
