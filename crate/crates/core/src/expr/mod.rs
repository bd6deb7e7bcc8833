//! User-written scalar fields `F(x, y)` over the coordinates `x1..xn, y1..yn`.
//!
//! Expressions are parsed once into an [`Expr`] and evaluated over any
//! [`Scalar`]: plain `f64` for values, [`Jet`] for exact partial derivatives.

mod parser;

use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError};
use crate::scalar::Scalar;

pub use parser::{ParseError, ParseErrorKind};

/// Byte range of a node in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn function(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    Const(f64),
    /// 1-based coordinate index.
    Coord(Axis, usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    /// Power with a constant exponent.
    Pow(Box<Node>, f64),
}

/// An AST node. Equality ignores source spans.
#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Const(a), NodeKind::Const(b)) => a.to_bits() == b.to_bits(),
            (NodeKind::Coord(a, i), NodeKind::Coord(b, j)) => a == b && i == j,
            (NodeKind::Unary(o, a), NodeKind::Unary(p, b)) => o == p && a == b,
            (NodeKind::Binary(o, a1, a2), NodeKind::Binary(p, b1, b2)) => o == p && a1 == b1 && a2 == b2,
            (NodeKind::Pow(a, e), NodeKind::Pow(b, f)) => e.to_bits() == f.to_bits() && a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} (in expression at {}..{})", span.start, span.end)]
pub struct EvalError {
    pub span: Span,
    #[source]
    pub source: JetError,
}

impl Node {
    fn eval<S: Scalar>(&self, x: &[S], y: &[S], unit: &S) -> Result<S, EvalError> {
        let at = |source: JetError| EvalError { span: self.span, source };
        Ok(match &self.kind {
            NodeKind::Const(c) => unit.lift(*c),
            NodeKind::Coord(Axis::X, i) => x[i - 1].clone(),
            NodeKind::Coord(Axis::Y, i) => y[i - 1].clone(),
            NodeKind::Unary(op, arg) => {
                let a = arg.eval(x, y, unit)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sqrt => a.try_sqrt().map_err(at)?,
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => a.try_ln().map_err(at)?,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                }
            }
            NodeKind::Binary(op, lhs, rhs) => {
                let a = lhs.eval(x, y, unit)?;
                let b = rhs.eval(x, y, unit)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a.try_div(&b).map_err(at)?,
                }
            }
            NodeKind::Pow(base, q) => base.eval(x, y, unit)?.pow(*q).map_err(at)?,
        })
    }

    fn visit_coords(&self, f: &mut impl FnMut(Axis, usize)) {
        match &self.kind {
            NodeKind::Const(_) => {}
            NodeKind::Coord(a, i) => f(*a, *i),
            NodeKind::Unary(_, a) | NodeKind::Pow(a, _) => a.visit_coords(f),
            NodeKind::Binary(_, a, b) => {
                a.visit_coords(f);
                b.visit_coords(f);
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Const(c) => write!(f, "{c}"),
            NodeKind::Coord(Axis::X, i) => write!(f, "x{i}"),
            NodeKind::Coord(Axis::Y, i) => write!(f, "y{i}"),
            NodeKind::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            NodeKind::Unary(op, a) => write!(f, "{}({a})", op.name()),
            NodeKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            NodeKind::Pow(a, q) if *q < 0.0 => write!(f, "({a}^(-{}))", -q),
            NodeKind::Pow(a, q) => write!(f, "({a}^{q})"),
        }
    }
}

/// A parsed expression over `x1..xn, y1..yn`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    /// Parses `source` for coordinates of dimension `n`.
    pub fn parse(source: &str, n: usize) -> Result<Expr, ParseError> {
        let root = parser::parse(source, n)?;
        Ok(Expr { root, dim: n })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depends_on(&self, axis: Axis) -> bool {
        let mut hit = false;
        self.root.visit_coords(&mut |a, _| hit |= a == axis);
        hit
    }

    /// Evaluates over any scalar; `x` and `y` must have length `dim`.
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, EvalError> {
        assert!(
            x.len() == self.dim && y.len() == self.dim,
            "expression over dimension {} evaluated with {} / {} coordinates",
            self.dim,
            x.len(),
            y.len()
        );
        let unit = x[0].lift(1.0);
        self.root.eval(x, y, &unit)
    }

    pub fn eval_plain(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        self.eval(x, y)
    }

    /// Evaluates with coordinates seeded as jet variables
    /// (`x` in slots `0..n`, `y` in slots `n..2n`).
    pub fn eval_jet(&self, x: &[f64], y: &[f64], order: usize) -> Result<Jet, EvalError> {
        let (xs, ys) = seed_jets(x, y, order).map_err(|source| EvalError { span: self.root.span, source })?;
        self.eval(&xs, &ys)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Coordinate jets for a phase point.
pub fn seed_jets(x: &[f64], y: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>), JetError> {
    let n = x.len();
    let xs = (0..n).map(|i| Jet::variable(2 * n, i, x[i], order)).collect::<Result<_, _>>()?;
    let ys = (0..n).map(|i| Jet::variable(2 * n, n + i, y[i], order)).collect::<Result<_, _>>()?;
    Ok((xs, ys))
}
