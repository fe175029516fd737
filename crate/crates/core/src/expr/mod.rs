//! Function definitions as DAGs of elementary function applications.
//!
//! A [`FunctionDef`] holds a node pool shared by all `m` output roots. Nodes
//! only reference earlier nodes, so the pool is always acyclic. Sharing
//! happens only where the source says so (`let` bindings or explicit reuse
//! through [`FunctionBuilder`]); identical subexpressions written twice stay
//! distinct.

mod dot;
mod parse;
mod print;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Algebra, Elementary};

pub use dot::{annotate, to_dot, DotAnnotations};
pub use parse::{parse, parse_with, ParseError, ParseErrorKind};

/// Index of a node in a [`FunctionDef`]'s pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// The 0-based input variable.
    Variable(usize),
    Constant(f64),
    Apply(Elementary, Vec<NodeId>),
}

/// One elementary transition of the evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduled {
    Node(NodeId),
    /// Output `output` is a variable or constant and gets its own copy step.
    OutputCopy { output: usize, source: NodeId },
}

/// `f(x₁,…,xₙ) = (f₁,…,f_m)` over a shared node pool.
#[derive(Clone, Debug)]
pub struct FunctionDef {
    name: String,
    vars: Vec<String>,
    nodes: Vec<Node>,
    outputs: Vec<NodeId>,
}

/// Incremental construction of a [`FunctionDef`]. Variable nodes are created
/// up front, one per parameter.
#[derive(Clone, Debug)]
pub struct FunctionBuilder {
    name: String,
    vars: Vec<String>,
    nodes: Vec<Node>,
}

impl FunctionBuilder {
    pub fn new<S: Into<String>>(name: impl Into<String>, vars: impl IntoIterator<Item = S>) -> Self {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        let nodes = (0..vars.len()).map(Node::Variable).collect();
        Self {
            name: name.into(),
            vars,
            nodes,
        }
    }

    pub fn var(&self, i: usize) -> Result<NodeId> {
        if i < self.vars.len() {
            Ok(NodeId(i))
        } else {
            Err(Error::IndexOutOfRange {
                what: "variable",
                index: i,
                limit: self.vars.len(),
            })
        }
    }

    pub fn constant(&mut self, c: f64) -> NodeId {
        self.nodes.push(Node::Constant(c));
        NodeId(self.nodes.len() - 1)
    }

    pub fn apply(&mut self, f: Elementary, args: &[NodeId]) -> Result<NodeId> {
        if args.len() != f.arity() {
            return Err(Error::Dimension {
                what: "elementary arguments",
                expected: f.arity(),
                actual: args.len(),
            });
        }
        if let Some(bad) = args.iter().find(|a| a.0 >= self.nodes.len()) {
            return Err(Error::IndexOutOfRange {
                what: "node",
                index: bad.0,
                limit: self.nodes.len(),
            });
        }
        self.nodes.push(Node::Apply(f, args.to_vec()));
        Ok(NodeId(self.nodes.len() - 1))
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len.max(self.vars.len()));
    }

    pub fn finish(self, outputs: Vec<NodeId>) -> Result<FunctionDef> {
        if self.vars.is_empty() {
            return Err(Error::Dimension {
                what: "input variables",
                expected: 1,
                actual: 0,
            });
        }
        if outputs.is_empty() {
            return Err(Error::Dimension {
                what: "outputs",
                expected: 1,
                actual: 0,
            });
        }
        if let Some(bad) = outputs.iter().find(|o| o.0 >= self.nodes.len()) {
            return Err(Error::IndexOutOfRange {
                what: "node",
                index: bad.0,
                limit: self.nodes.len(),
            });
        }
        Ok(FunctionDef {
            name: self.name,
            vars: self.vars,
            nodes: self.nodes,
            outputs,
        })
    }
}

impl FunctionDef {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of inputs `n`.
    pub fn n(&self) -> usize {
        self.vars.len()
    }

    /// Number of outputs `m`.
    pub fn m(&self) -> usize {
        self.outputs.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// Deterministic evaluation order of the elementary transitions.
    ///
    /// Outputs are walked left to right in depth-first post-order. An
    /// output's root is held back unless some other node consumes it, and the
    /// held-back roots are appended in output order at the end, with a copy
    /// step for every output that is a bare variable or constant. Every
    /// node appears after all of its arguments.
    pub fn schedule(&self) -> Vec<Scheduled> {
        let mut visited = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        for &root in &self.outputs {
            if let Node::Apply(_, args) = &self.nodes[root.0] {
                for &a in args {
                    self.post_order(a, &mut visited, &mut order);
                }
            }
        }
        let mut tail = Vec::new();
        for (output, &root) in self.outputs.iter().enumerate() {
            match &self.nodes[root.0] {
                Node::Apply(..) => {
                    if !visited[root.0] {
                        visited[root.0] = true;
                        tail.push(Scheduled::Node(root));
                    }
                }
                _ => tail.push(Scheduled::OutputCopy {
                    output,
                    source: root,
                }),
            }
        }
        order.extend(tail);
        order
    }

    fn post_order(&self, id: NodeId, visited: &mut [bool], order: &mut Vec<Scheduled>) {
        if visited[id.0] || !matches!(self.nodes[id.0], Node::Apply(..)) {
            return;
        }
        // Explicit stack: generated chains can be deep.
        let mut stack = vec![(id, 0usize)];
        while let Some((node, child)) = stack.pop() {
            let Node::Apply(_, args) = &self.nodes[node.0] else {
                unreachable!()
            };
            if child < args.len() {
                stack.push((node, child + 1));
                let next = args[child];
                if !visited[next.0] && matches!(self.nodes[next.0], Node::Apply(..)) {
                    stack.push((next, 0));
                }
            } else if !visited[node.0] {
                visited[node.0] = true;
                order.push(Scheduled::Node(node));
            }
        }
    }

    /// Number of elementary transitions `μ`, including output copies.
    pub fn mu(&self) -> usize {
        self.schedule().len()
    }

    /// Nodes reachable from the outputs, in increasing id order.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self.outputs.clone();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0], true) {
                continue;
            }
            if let Node::Apply(_, args) = &self.nodes[id.0] {
                stack.extend(args);
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).map(NodeId).collect()
    }

    /// Evaluates the definition over any algebra, each node exactly once.
    pub fn eval_generic<A: Algebra>(&self, inputs: &[A::Elem], algebra: &A) -> Result<Vec<A::Elem>> {
        Ok(self.eval_nodes(inputs, algebra)?.outputs)
    }

    /// Like [`eval_generic`](Self::eval_generic) but also returns the value of
    /// every reachable node (indexed by node id).
    pub fn eval_nodes<A: Algebra>(&self, inputs: &[A::Elem], algebra: &A) -> Result<NodeValues<A::Elem>> {
        if inputs.len() != self.n() {
            return Err(Error::Dimension {
                what: "inputs",
                expected: self.n(),
                actual: inputs.len(),
            });
        }
        let mut values: Vec<Option<A::Elem>> = vec![None; self.nodes.len()];
        let mut copies: Vec<Option<A::Elem>> = vec![None; self.m()];
        let leaf = |id: NodeId, values: &mut Vec<Option<A::Elem>>| {
            if values[id.0].is_none() {
                values[id.0] = Some(match &self.nodes[id.0] {
                    Node::Variable(i) => inputs[*i].clone(),
                    Node::Constant(c) => algebra.constant(*c),
                    Node::Apply(..) => unreachable!("scheduled before use"),
                });
            }
        };
        for step in self.schedule() {
            match step {
                Scheduled::Node(id) => {
                    let Node::Apply(f, args) = &self.nodes[id.0] else {
                        unreachable!()
                    };
                    for &a in args {
                        leaf(a, &mut values);
                    }
                    let argv: Vec<A::Elem> = args
                        .iter()
                        .map(|a| values[a.0].clone().expect("argument evaluated"))
                        .collect();
                    let v = algebra
                        .apply(f, &argv)
                        .map_err(|e| self.at_node(id, e))?;
                    values[id.0] = Some(v);
                }
                Scheduled::OutputCopy { output, source } => {
                    leaf(source, &mut values);
                    let v = values[source.0].clone().expect("leaf evaluated");
                    copies[output] = Some(algebra.apply(&Elementary::Identity, &[v])?);
                }
            }
        }
        let outputs = self
            .outputs
            .iter()
            .enumerate()
            .map(|(j, o)| {
                copies[j]
                    .clone()
                    .or_else(|| values[o.0].clone())
                    .expect("output evaluated")
            })
            .collect();
        Ok(NodeValues { values, outputs })
    }

    /// Wraps an evaluation error with the path from the first output that
    /// reaches `id` down to the failing node.
    pub(crate) fn at_node(&self, id: NodeId, source: Error) -> Error {
        Error::AtNode {
            path: self.path_to(id),
            source: Box::new(source),
        }
    }

    /// Human-readable route such as `f[1] > * > sin`.
    pub fn path_to(&self, target: NodeId) -> String {
        for (j, &root) in self.outputs.iter().enumerate() {
            if let Some(route) = self.find_path(root, target) {
                let names: Vec<String> = route.iter().map(|&id| self.label(id)).collect();
                return format!("{}[{}] > {}", self.name, j, names.join(" > "));
            }
        }
        format!("node {}", target.0)
    }

    fn find_path(&self, root: NodeId, target: NodeId) -> Option<Vec<NodeId>> {
        let mut parent: HashMap<NodeId, NodeId> = HashMap::new();
        let mut stack = vec![root];
        let mut seen = vec![false; self.nodes.len()];
        seen[root.0] = true;
        while let Some(id) = stack.pop() {
            if id == target {
                let mut route = vec![id];
                let mut cur = id;
                while let Some(&p) = parent.get(&cur) {
                    route.push(p);
                    cur = p;
                }
                route.reverse();
                return Some(route);
            }
            if let Node::Apply(_, args) = &self.nodes[id.0] {
                for &a in args.iter().rev() {
                    if a.0 >= target.0 && !seen[a.0] {
                        seen[a.0] = true;
                        parent.insert(a, id);
                        stack.push(a);
                    }
                }
            }
        }
        None
    }

    /// Display label of a node: variable name, constant value or function.
    pub fn label(&self, id: NodeId) -> String {
        match &self.nodes[id.0] {
            Node::Variable(i) => self.vars[*i].clone(),
            Node::Constant(c) => format!("{c}"),
            Node::Apply(f, _) => f.to_string(),
        }
    }

    /// Source text that parses back to a structurally identical definition.
    pub fn unparse(&self) -> String {
        print::unparse(self)
    }

    /// Structural identity: same inputs, outputs and sharing pattern over the
    /// reachable nodes. Variables and constants compare by value; node ids
    /// and `let` names are irrelevant.
    pub fn structurally_eq(&self, other: &FunctionDef) -> bool {
        self.n() == other.n() && self.m() == other.m() && self.canonical() == other.canonical()
    }

    fn canonical(&self) -> (Vec<CanonNode>, Vec<usize>) {
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        let mut leaves: HashMap<CanonNode, usize> = HashMap::new();
        let mut out: Vec<CanonNode> = Vec::new();
        let mut intern_leaf = |id: NodeId, out: &mut Vec<CanonNode>, index: &mut HashMap<NodeId, usize>| {
            let key = match &self.nodes[id.0] {
                Node::Variable(i) => CanonNode::Var(*i),
                Node::Constant(c) => CanonNode::Const(c.to_bits()),
                Node::Apply(..) => unreachable!(),
            };
            let pos = *leaves.entry(key.clone()).or_insert_with(|| {
                out.push(key);
                out.len() - 1
            });
            index.insert(id, pos);
            pos
        };
        for step in self.schedule() {
            let id = match step {
                Scheduled::Node(id) => id,
                Scheduled::OutputCopy { source, .. } => {
                    intern_leaf(source, &mut out, &mut index);
                    continue;
                }
            };
            let Node::Apply(f, args) = &self.nodes[id.0] else {
                unreachable!()
            };
            let canon_args: Vec<usize> = args
                .iter()
                .map(|&a| match index.get(&a) {
                    Some(&p) => p,
                    None => intern_leaf(a, &mut out, &mut index),
                })
                .collect();
            out.push(CanonNode::Apply(f.to_string(), canon_args));
            index.insert(id, out.len() - 1);
        }
        let outputs = self.outputs.iter().map(|o| index[o]).collect();
        (out, outputs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CanonNode {
    Var(usize),
    Const(u64),
    Apply(String, Vec<usize>),
}

/// Per-node values from [`FunctionDef::eval_nodes`].
#[derive(Clone, Debug)]
pub struct NodeValues<T> {
    /// Indexed by node id; `None` for unreachable nodes.
    pub values: Vec<Option<T>>,
    pub outputs: Vec<T>,
}

impl fmt::Display for FunctionDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.unparse())
    }
}
