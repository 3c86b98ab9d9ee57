//! Scalar expression trees over state (`x`), lifted (`z`) and input (`u`)
//! variables, with symbolic differentiation and point/interval evaluation.
//!
//! The infix grammar accepted by [`Expr::parse`]:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! ident  := ('x' | 'z' | 'u') digits        (1-based)
//! func   := 'exp' | 'sin' | 'cos' | 'tan'
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// A variable reference. Indices are zero-based; the textual form is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    Z(usize),
    U(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Z(i) => write!(f, "z{}", i + 1),
            Var::U(i) => write!(f, "u{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Tan(Box<Expr>),
}

/// Numeric domains an [`Expr`] can be evaluated over.
pub trait Scalar: Copy {
    fn constant(v: f64) -> Self;
    fn add(self, rhs: Self) -> Self;
    fn sub(self, rhs: Self) -> Self;
    fn mul(self, rhs: Self) -> Self;
    fn neg(self) -> Self;
    fn powi(self, n: u32) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Result<Self>;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn mul(self, rhs: Self) -> Self {
        self * rhs
    }
    fn neg(self) -> Self {
        -self
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Result<Self> {
        if f64::cos(self).abs() < 1e-15 {
            return Err(Error::domain(format!("tan evaluated at a pole ({self})")));
        }
        Ok(f64::tan(self))
    }
}

impl Scalar for Interval {
    fn constant(v: f64) -> Self {
        Interval::point(v)
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn mul(self, rhs: Self) -> Self {
        self * rhs
    }
    fn neg(self) -> Self {
        -self
    }
    fn powi(self, n: u32) -> Self {
        Interval::powi(self, n)
    }
    fn exp(self) -> Self {
        Interval::exp(self)
    }
    fn sin(self) -> Self {
        Interval::sin(self)
    }
    fn cos(self) -> Self {
        Interval::cos(self)
    }
    fn tan(self) -> Result<Self> {
        Interval::tan(self)
    }
}

/// Variable bindings for evaluation. Unused slices may be empty.
#[derive(Clone, Copy, Debug)]
pub struct Env<'a, T> {
    pub x: &'a [T],
    pub z: &'a [T],
    pub u: &'a [T],
}

impl<'a, T: Copy> Env<'a, T> {
    pub fn states(x: &'a [T]) -> Self {
        Env { x, z: &[], u: &[] }
    }

    pub fn lifted(z: &'a [T], u: &'a [T]) -> Self {
        Env { x: &[], z, u }
    }

    fn get(&self, v: Var) -> Result<T> {
        let (slice, i) = match v {
            Var::X(i) => (self.x, i),
            Var::Z(i) => (self.z, i),
            Var::U(i) => (self.u, i),
        };
        slice
            .get(i)
            .copied()
            .ok_or_else(|| Error::dim(format!("variable {v} is not bound")))
    }
}

// Smart constructors that fold the constants symbolic differentiation produces.
fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ if is_const(&b, 0.0) => a,
        _ if is_const(&a, 0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Expr::Const(0.0),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn pow(a: Expr, n: u32) -> Expr {
    match (a, n) {
        (_, 0) => Expr::Const(1.0),
        (a, 1) => a,
        (Expr::Const(x), n) => Expr::Const(x.powi(n as i32)),
        (a, n) => Expr::Pow(Box::new(a), n),
    }
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn eval<T: Scalar>(&self, env: &Env<'_, T>) -> Result<T> {
        Ok(match self {
            Expr::Const(c) => T::constant(*c),
            Expr::Var(v) => env.get(*v)?,
            Expr::Add(a, b) => a.eval(env)?.add(b.eval(env)?),
            Expr::Sub(a, b) => a.eval(env)?.sub(b.eval(env)?),
            Expr::Mul(a, b) => a.eval(env)?.mul(b.eval(env)?),
            Expr::Neg(a) => a.eval(env)?.neg(),
            Expr::Pow(a, n) => a.eval(env)?.powi(*n),
            Expr::Exp(a) => a.eval(env)?.exp(),
            Expr::Sin(a) => a.eval(env)?.sin(),
            Expr::Cos(a) => a.eval(env)?.cos(),
            Expr::Tan(a) => a.eval(env)?.tan()?,
        })
    }

    /// Symbolic partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(w) => Expr::Const(if *w == v { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Pow(_, 0) => Expr::Const(0.0),
            Expr::Pow(a, n) => mul(mul(Expr::Const(*n as f64), pow((**a).clone(), n - 1)), a.diff(v)),
            Expr::Exp(a) => mul(self.clone(), a.diff(v)),
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.diff(v)),
            Expr::Cos(a) => mul(neg(Expr::Sin(a.clone())), a.diff(v)),
            // d tan(a) = (1 + tan(a)^2) da keeps derivatives inside the grammar
            Expr::Tan(a) => mul(add(Expr::Const(1.0), pow(self.clone(), 2)), a.diff(v)),
        }
    }

    pub fn is_zero(&self) -> bool {
        is_const(self, 0.0)
    }

    /// Is this expression affine (degree ≤ 1) in its variables?
    pub fn is_affine(&self) -> bool {
        self.degree().is_some_and(|d| d <= 1)
    }

    // Polynomial degree, or None for transcendental terms.
    fn degree(&self) -> Option<u32> {
        match self {
            Expr::Const(_) => Some(0),
            Expr::Var(_) => Some(1),
            Expr::Add(a, b) | Expr::Sub(a, b) => Some(a.degree()?.max(b.degree()?)),
            Expr::Mul(a, b) => Some(a.degree()? + b.degree()?),
            Expr::Neg(a) => a.degree(),
            Expr::Pow(a, n) => Some(a.degree()? * n),
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Tan(a) => (a.degree()? == 0).then_some(0),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Tan(a) => {
                a.visit_vars(f)
            }
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

/// Interval enclosure of `expr` over a box bound to the state variables
/// `x1..xn` (box dimension i ↔ `x{i+1}`).
pub fn interval_eval(expr: &Expr, bx: &crate::zonotope::IntervalBox) -> Result<Interval> {
    let items = bx.intervals();
    expr.eval(&Env::states(&items))
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

// Binding strength used by Display to decide where parentheses are needed.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(c) if *c < 0.0 => 3,
        _ => 5,
    }
}

struct Wrapped<'a>(&'a Expr, u8);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(self.0) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => write!(f, "{} + {}", Wrapped(a, 1), Wrapped(b, 2)),
            Expr::Sub(a, b) => write!(f, "{} - {}", Wrapped(a, 1), Wrapped(b, 2)),
            Expr::Mul(a, b) => write!(f, "{}*{}", Wrapped(a, 2), Wrapped(b, 3)),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, 3)),
            Expr::Pow(a, n) => write!(f, "{}^{n}", Wrapped(a, 5)),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Tan(a) => write!(f, "tan({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(b'*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a non-negative integer exponent"));
            }
            let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.error("exponent out of range"))?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Const).map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let func: Option<fn(Box<Expr>) -> Expr> = match word {
            "exp" => Some(Expr::Exp),
            "sin" => Some(Expr::Sin),
            "cos" => Some(Expr::Cos),
            "tan" => Some(Expr::Tan),
            _ => None,
        };
        if let Some(func) = func {
            if !self.eat(b'(') {
                return Err(self.error("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(func(Box::new(arg)));
        }
        let (kind, digits) = word.split_at(1);
        let index: usize = digits.parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("unknown identifier `{word}`"),
        })?;
        if index == 0 {
            return Err(Error::Parse {
                offset: start,
                message: format!("variable indices are 1-based (`{word}`)"),
            });
        }
        let var = match kind {
            "x" => Var::X(index - 1),
            "z" => Var::Z(index - 1),
            "u" => Var::U(index - 1),
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unknown identifier `{word}`"),
                })
            }
        };
        Ok(Expr::Var(var))
    }
}
