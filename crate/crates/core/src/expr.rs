//! Scalar expression language used to declare Hamiltonians, potentials and
//! structure functions in model configs.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `2^(-1)`. There is no implicit multiplication.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// The closed set of callable functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
    Group(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    InvalidNumber(String),
    Unexpected { expected: String, found: String },
    UnknownFunction(String),
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: {}", describe(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Empty => "empty expression".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::InvalidNumber(s) => format!("invalid number literal {s:?}"),
        ParseErrorKind::Unexpected { expected, found } => {
            format!("expected {expected}, found {found}")
        }
        ParseErrorKind::UnknownFunction(name) => format!(
            "unknown function `{name}` (known: sin, cos, tan, exp, log, sqrt, abs)"
        ),
        ParseErrorKind::TooDeep => format!("expression nested deeper than {MAX_DEPTH} levels"),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown identifier `{name}`")]
pub struct BindError {
    pub name: String,
}

// ---------------------------------------------------------------- lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
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
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidNumber(text.to_string()),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::InvalidNumber(text.to_string()),
                    });
                }
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

// ---------------------------------------------------------------- parsing

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found: self.peek().describe(),
            },
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.offset(),
                kind: ParseErrorKind::TooDeep,
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Tok::Caret) {
            self.bump();
            self.enter()?;
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if !matches!(self.peek(), Tok::LParen) {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name).ok_or(ParseError {
                    offset,
                    kind: ParseErrorKind::UnknownFunction(name),
                })?;
                self.bump();
                let arg = self.expr()?;
                self.close_paren()?;
                Ok(Expr::Call {
                    func,
                    arg: Box::new(arg),
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(Expr::Group(Box::new(inner)))
            }
            _ => Err(self.unexpected("number, identifier or `(`")),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::RParen) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parses `source` into an [`Expr`]. Identifiers are resolved later, at
/// bind or evaluation time; unknown function names fail here.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    if matches!(toks[0].1, Tok::End) {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(p.unexpected("operator or end of input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------- arithmetic

fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, String> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err("division by zero".into());
            }
            a / b
        }
        BinOp::Pow => a.powf(b),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite result of {a} {} {b}", op.symbol()))
    }
}

fn apply_func(func: Func, x: f64) -> Result<f64, String> {
    let v = match func {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => x.tan(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err(format!("log of non-positive value {x}"));
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(format!("sqrt of negative value {x}"));
            }
            x.sqrt()
        }
        Func::Abs => x.abs(),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite result of {}({x})", func.name()))
    }
}

impl Expr {
    /// Evaluates with variables looked up through `lookup`.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        let domain = |e: &Expr, reason: String| EvalError::Domain {
            expr: e.to_string(),
            reason,
        };
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Neg(inner) => Ok(-inner.eval_with(lookup)?),
            Expr::Group(inner) => inner.eval_with(lookup),
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_with(lookup)?;
                let b = rhs.eval_with(lookup)?;
                apply_bin(*op, a, b).map_err(|r| domain(self, r))
            }
            Expr::Call { func, arg } => {
                let x = arg.eval_with(lookup)?;
                apply_func(*func, x).map_err(|r| domain(self, r))
            }
        }
    }

    /// Free variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(n) => {
                    if !out.iter().any(|o| o == n) {
                        out.push(n.clone());
                    }
                }
                Expr::Neg(i) | Expr::Group(i) => walk(i, out),
                Expr::Call { arg, .. } => walk(arg, out),
                Expr::Binary { lhs, rhs, .. } => {
                    walk(lhs, out);
                    walk(rhs, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Resolves every identifier to a coordinate slot or a fixed value.
    pub fn bind(&self, resolve: &dyn Fn(&str) -> Option<Binding>) -> Result<BoundExpr, BindError> {
        fn go(
            e: &Expr,
            resolve: &dyn Fn(&str) -> Option<Binding>,
        ) -> Result<Node, BindError> {
            Ok(match e {
                Expr::Num(v) => Node::Const(*v),
                Expr::Var(n) => match resolve(n) {
                    Some(Binding::Coord(i)) => Node::Coord(i, n.as_str().into()),
                    Some(Binding::Value(v)) => Node::Param(v, n.as_str().into()),
                    None => return Err(BindError { name: n.clone() }),
                },
                Expr::Neg(i) => Node::Neg(Box::new(go(i, resolve)?)),
                Expr::Group(i) => go(i, resolve)?,
                Expr::Call { func, arg } => Node::Call(*func, Box::new(go(arg, resolve)?)),
                Expr::Binary { op, lhs, rhs } => Node::Bin(
                    *op,
                    Box::new(go(lhs, resolve)?),
                    Box::new(go(rhs, resolve)?),
                ),
            })
        }
        Ok(BoundExpr {
            root: Arc::new(go(self, resolve)?),
        })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 && min > PREC_UNARY {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(n) => f.write_str(n),
            Expr::Group(inner) => {
                f.write_str("(")?;
                inner.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Call { func, arg } => {
                write!(f, "{}(", func.name())?;
                arg.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Neg(inner) => {
                let wrap = min > PREC_UNARY;
                if wrap {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                inner.fmt_prec(f, PREC_UNARY)?;
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let wrap = min > p;
                if wrap {
                    f.write_str("(")?;
                }
                let (lmin, rmin) = if *op == BinOp::Pow {
                    (PREC_ATOM, PREC_UNARY)
                } else {
                    (p, p + 1)
                };
                lhs.fmt_prec(f, lmin)?;
                write!(f, " {} ", op.symbol())?;
                rhs.fmt_prec(f, rmin)?;
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// Prints with the minimum parentheses needed to re-parse to an equivalent
/// tree; explicit groups are kept.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Evaluates `e` against a name-to-value environment.
pub fn evaluate(e: &Expr, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
    e.eval_with(&|name| env.get(name).copied())
}

// ---------------------------------------------------------------- bound form

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binding {
    Coord(usize),
    Value(f64),
}

#[derive(Debug)]
enum Node {
    Const(f64),
    Coord(usize, Arc<str>),
    Param(f64, Arc<str>),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self {
            Node::Const(v) | Node::Param(v, _) => Ok(*v),
            Node::Coord(i, name) => point
                .get(*i)
                .copied()
                .ok_or_else(|| EvalError::Unbound(name.to_string())),
            Node::Neg(inner) => Ok(-inner.eval(point)?),
            Node::Bin(op, lhs, rhs) => {
                let a = lhs.eval(point)?;
                let b = rhs.eval(point)?;
                apply_bin(*op, a, b).map_err(|reason| EvalError::Domain {
                    expr: self.to_string(),
                    reason,
                })
            }
            Node::Call(func, arg) => {
                let x = arg.eval(point)?;
                apply_func(*func, x).map_err(|reason| EvalError::Domain {
                    expr: self.to_string(),
                    reason,
                })
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Node::Const(v) => write!(f, "{v:?}"),
            Node::Coord(_, n) | Node::Param(_, n) => f.write_str(n),
            Node::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Node::Neg(inner) => {
                let wrap = min > PREC_UNARY;
                if wrap {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                inner.fmt_prec(f, PREC_UNARY)?;
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Node::Bin(op, lhs, rhs) => {
                let p = op.precedence();
                let wrap = min > p;
                if wrap {
                    f.write_str("(")?;
                }
                let (lmin, rmin) = if *op == BinOp::Pow {
                    (PREC_ATOM, PREC_UNARY)
                } else {
                    (p, p + 1)
                };
                lhs.fmt_prec(f, lmin)?;
                write!(f, " {} ", op.symbol())?;
                rhs.fmt_prec(f, rmin)?;
                if wrap {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// An expression whose identifiers have been resolved against a phase space.
/// Cheap to clone and safe to evaluate from many threads.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    root: Arc<Node>,
}

impl BoundExpr {
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.root.eval(point)
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
