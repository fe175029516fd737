//! Recursive-descent parser for function definitions.
//!
//! ```text
//! def    := ident "(" ident ("," ident)* ")" "=" body
//! body   := "let" ident "=" sum "in" body | tuple
//! tuple  := "(" sum ("," sum)+ ")" | sum
//! sum    := prod (("+"|"-") prod)*
//! prod   := unary (("*"|"/") unary)*
//! unary  := "-" number | "-" unary | power   ("-" number: one constant, unless a "^" follows)
//! power  := atom ("^" "-"? integer)?
//! atom   := number | ident | ident "(" sum ("," sum)* ")" | "(" sum ")"
//! ```
//!
//! `pow(a, k)` with an integer literal `k` is the same as `a^k`; any other
//! exponent is rewritten to `exp(k * ln(a))`. `copy(a)` is the identity.

use std::fmt;

use thiserror::Error;

use super::{FunctionBuilder, FunctionDef, Node, NodeId};
use crate::scalar::{Catalogue, Elementary};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unexpected character {0:?}")]
    BadChar(char),
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("{function} takes {expected} argument(s), got {found}")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("parameter {0:?} declared twice")]
    DuplicateParameter(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::Number(s) => write!(f, "number {s}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Eq => f.write_str("'='"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(source: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            Tok::Number(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::BadChar(other),
                    })
                }
            }
        };
        column += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

/// Parses with the standard catalogue.
pub fn parse(source: &str) -> Result<FunctionDef, ParseError> {
    parse_with(source, &Catalogue::standard())
}

/// Parses, resolving function names through `catalogue`.
pub fn parse_with(source: &str, catalogue: &Catalogue) -> Result<FunctionDef, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        at: 0,
        catalogue,
        builder: FunctionBuilder::new("", Vec::<String>::new()),
        scope: Vec::new(),
    };
    p.def()
}

struct Parser<'a> {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
    catalogue: &'a Catalogue,
    builder: FunctionBuilder,
    scope: Vec<(String, NodeId)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.at + 1).min(self.tokens.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: pos.line,
            column: pos.column,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_at(
            self.pos(),
            ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found: self.peek().to_string(),
            },
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn def(&mut self) -> PResult<FunctionDef> {
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params: Vec<String> = Vec::new();
        loop {
            let pos = self.pos();
            let p = self.ident()?;
            if params.contains(&p) {
                return Err(self.error_at(pos, ParseErrorKind::DuplicateParameter(p)));
            }
            params.push(p);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Eq)?;
        self.builder = FunctionBuilder::new(name, params.iter().cloned());
        self.scope = params
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, NodeId(i)))
            .collect();
        let outputs = self.body()?;
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        let builder = std::mem::replace(&mut self.builder, FunctionBuilder::new("", Vec::<String>::new()));
        Ok(builder.finish(outputs).expect("parser builds valid definitions"))
    }

    fn body(&mut self) -> PResult<Vec<NodeId>> {
        if *self.peek() == Tok::Ident("let".into()) {
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::Eq)?;
            let value = self.sum()?;
            self.expect(Tok::Ident("in".into()))?;
            self.scope.push((name, value));
            let out = self.body();
            self.scope.pop();
            return out;
        }
        self.tuple()
    }

    fn tuple(&mut self) -> PResult<Vec<NodeId>> {
        if *self.peek() == Tok::LParen {
            let (mark, nodes) = (self.at, self.builder.len());
            self.bump();
            let first = self.sum()?;
            if *self.peek() == Tok::Comma {
                let mut outs = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    outs.push(self.sum()?);
                }
                self.expect(Tok::RParen)?;
                return Ok(outs);
            }
            self.at = mark;
            self.builder.truncate(nodes);
        }
        Ok(vec![self.sum()?])
    }

    fn apply(&mut self, f: Elementary, args: &[NodeId]) -> NodeId {
        self.builder.apply(f, args).expect("arity checked by parser")
    }

    fn sum(&mut self) -> PResult<NodeId> {
        let mut lhs = self.prod()?;
        loop {
            let f = match self.peek() {
                Tok::Plus => Elementary::Add,
                Tok::Minus => Elementary::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.prod()?;
            lhs = self.apply(f, &[lhs, rhs]);
        }
    }

    fn prod(&mut self) -> PResult<NodeId> {
        let mut lhs = self.unary()?;
        loop {
            let f = match self.peek() {
                Tok::Star => Elementary::Mul,
                Tok::Slash => Elementary::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = self.apply(f, &[lhs, rhs]);
        }
    }

    fn unary(&mut self) -> PResult<NodeId> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // A signed literal is one constant, unless it is a power base.
            if let (Tok::Number(text), false) = (self.peek().clone(), *self.peek2() == Tok::Caret) {
                let pos = self.pos();
                self.bump();
                let v = self.number(&text, pos)?;
                return Ok(self.builder.constant(-v));
            }
            let inner = self.unary()?;
            return Ok(self.apply(Elementary::Neg, &[inner]));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<NodeId> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let pos = self.pos();
        let text = match self.peek().clone() {
            Tok::Number(t) => t,
            _ => return Err(self.unexpected("integer exponent")),
        };
        self.bump();
        let k: i32 = text
            .parse()
            .map_err(|_| self.error_at(pos, ParseErrorKind::BadNumber(text.clone())))?;
        Ok(self.apply(Elementary::PowI(if negative { -k } else { k }), &[base]))
    }

    fn number(&mut self, text: &str, pos: Pos) -> PResult<f64> {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error_at(pos, ParseErrorKind::BadNumber(text.to_string()))),
        }
    }

    fn atom(&mut self) -> PResult<NodeId> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => {
                self.bump();
                let v = self.number(&text, pos)?;
                Ok(self.builder.constant(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let mut args = vec![self.sum()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.sum()?);
                }
                self.expect(Tok::RParen)?;
                self.call(&name, args, pos)
            }
            Tok::Ident(name) => {
                self.bump();
                self.scope
                    .iter()
                    .rev()
                    .find(|(n, _)| *n == name)
                    .map(|(_, id)| *id)
                    .ok_or_else(|| self.error_at(pos, ParseErrorKind::UnboundVariable(name)))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn call(&mut self, name: &str, args: Vec<NodeId>, pos: Pos) -> PResult<NodeId> {
        let f = match name {
            "pow" => return self.pow_call(args, pos),
            "copy" => Elementary::Identity,
            _ => self
                .catalogue
                .get(name)
                .cloned()
                .ok_or_else(|| self.error_at(pos, ParseErrorKind::UnknownFunction(name.into())))?,
        };
        self.check_arity(name, f.arity(), args.len(), pos)?;
        Ok(self.apply(f, &args))
    }

    fn check_arity(&self, name: &str, expected: usize, found: usize, pos: Pos) -> PResult<()> {
        if expected == found {
            Ok(())
        } else {
            Err(self.error_at(
                pos,
                ParseErrorKind::Arity {
                    function: name.into(),
                    expected,
                    found,
                },
            ))
        }
    }

    fn pow_call(&mut self, args: Vec<NodeId>, pos: Pos) -> PResult<NodeId> {
        self.check_arity("pow", 2, args.len(), pos)?;
        let (base, exponent) = (args[0], args[1]);
        if let Some(k) = self.integer_literal(exponent) {
            return Ok(self.apply(Elementary::PowI(k), &[base]));
        }
        let ln = self.apply(Elementary::Ln, &[base]);
        let scaled = self.apply(Elementary::Mul, &[exponent, ln]);
        Ok(self.apply(Elementary::Exp, &[scaled]))
    }

    /// `k` or `-k` written as an integer literal that fits in `i32`.
    fn integer_literal(&self, id: NodeId) -> Option<i32> {
        let nodes = &self.builder.nodes;
        let (value, sign) = match &nodes[id.0] {
            Node::Constant(c) => (*c, 1.0),
            Node::Apply(Elementary::Neg, a) => match nodes[a[0].0] {
                Node::Constant(c) => (c, -1.0),
                _ => return None,
            },
            _ => return None,
        };
        let v = sign * value;
        (v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX)).then_some(v as i32)
    }
}
