//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Binary operators
//! are left-associative except `^`, which is right-associative and takes a
//! constant exponent.

use std::fmt;

use thiserror::Error;

use super::{Axis, BinaryOp, Node, NodeKind, Span, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    IndexOutOfRange { name: String, dim: usize },
    NonConstantExponent,
    InvalidExponent(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::IndexOutOfRange { name, dim } => {
                write!(f, "coordinate '{name}' out of range for dimension {dim}")
            }
            ParseErrorKind::NonConstantExponent => write!(f, "exponent must be a constant"),
            ParseErrorKind::InvalidExponent(msg) => write!(f, "invalid exponent: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Op(c) => write!(f, "'{c}'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn syntax(msg: impl Into<String>, position: usize) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), position }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| syntax(format!("malformed number '{text}'"), start))?;
            if !v.is_finite() {
                return Err(syntax(format!("number '{text}' is out of range"), start));
            }
            Tok::Num(v)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(syntax(format!("unexpected character '{ch}'"), start));
                }
            }
        };
        out.push((tok, Span { start, end: i }));
    }
    out.push((Tok::End, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self, open: Span) -> Result<Span, ParseError> {
        match self.bump() {
            (Tok::RParen, s) => Ok(s),
            (t, s) => Err(syntax(format!("expected ')' to close '(' at {}, found {t}", open.start), s.start)),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Node { kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Node { kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Tok::Op('-') = self.peek() {
            let (_, s) = self.bump();
            let arg = self.unary()?;
            let span = Span { start: s.start, end: arg.span.end };
            return Ok(Node { kind: NodeKind::Unary(UnaryOp::Neg, Box::new(arg)), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            let q = constant_value(&exponent)?;
            let span = Span { start: base.span.start, end: exponent.span.end };
            return Ok(Node { kind: NodeKind::Pow(Box::new(base), q), span });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node { kind: NodeKind::Const(v), span }),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.expect_rparen(span)?;
                Ok(Node { kind: inner.kind, span: Span { start: span.start, end: close.end } })
            }
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::function(&name) {
                    let open = match self.bump() {
                        (Tok::LParen, s) => s,
                        (t, s) => {
                            return Err(syntax(format!("expected '(' after function '{name}', found {t}"), s.start))
                        }
                    };
                    let arg = self.expr()?;
                    let close = self.expect_rparen(open)?;
                    let span = Span { start: span.start, end: close.end };
                    return Ok(Node { kind: NodeKind::Unary(op, Box::new(arg)), span });
                }
                self.coordinate(&name, span)
            }
            t => Err(syntax(format!("unexpected {t}"), span.start)),
        }
    }

    fn coordinate(&self, name: &str, span: Span) -> Result<Node, ParseError> {
        let unknown = || ParseError { kind: ParseErrorKind::UnknownIdentifier(name.into()), position: span.start };
        let axis = match name.as_bytes().first() {
            Some(b'x') => Axis::X,
            Some(b'y') => Axis::Y,
            _ => return Err(unknown()),
        };
        let digits = &name[1..];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 || index > self.dim {
            return Err(ParseError {
                kind: ParseErrorKind::IndexOutOfRange { name: name.into(), dim: self.dim },
                position: span.start,
            });
        }
        Ok(Node { kind: NodeKind::Coord(axis, index), span })
    }
}

fn constant_value(node: &Node) -> Result<f64, ParseError> {
    let mut has_coord = false;
    node.visit_coords(&mut |_, _| has_coord = true);
    if has_coord {
        return Err(ParseError { kind: ParseErrorKind::NonConstantExponent, position: node.span.start });
    }
    let unit = 1.0f64;
    let q = node.eval::<f64>(&[], &[], &unit).map_err(|e| ParseError {
        kind: ParseErrorKind::InvalidExponent(e.source.to_string()),
        position: node.span.start,
    })?;
    if !q.is_finite() {
        return Err(ParseError {
            kind: ParseErrorKind::InvalidExponent(format!("{q} is not finite")),
            position: node.span.start,
        });
    }
    Ok(q)
}

pub(super) fn parse(src: &str, dim: usize) -> Result<Node, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, dim };
    if *p.peek() == Tok::End {
        return Err(syntax("empty expression", 0));
    }
    let node = p.expr()?;
    match p.peek() {
        Tok::End => Ok(node),
        t => Err(syntax(format!("unexpected {t} after expression"), p.span().start)),
    }
}
