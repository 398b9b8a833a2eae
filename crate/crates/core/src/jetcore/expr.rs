//! Closed-form scalar expressions in the chart coordinates `x1, ..., xn`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | "pi" | "e" | "x" digits | func "(" expr ")" | "(" expr ")"
//! func    := sin | cos | exp | log | sqrt | sinh | cosh
//! ```
//!
//! Exponents must be constant. Integer exponents use repeated products, so
//! negative bases are fine; other exponents require a positive base.

use std::fmt;

use super::series::TruncatedSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Primitive {
    fn from_name(name: &str) -> Option<Primitive> {
        Some(match name {
            "sin" => Primitive::Sin,
            "cos" => Primitive::Cos,
            "exp" => Primitive::Exp,
            "log" | "ln" => Primitive::Log,
            "sqrt" => Primitive::Sqrt,
            "sinh" => Primitive::Sinh,
            "cosh" => Primitive::Cosh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Primitive::Sin => "sin",
            Primitive::Cos => "cos",
            Primitive::Exp => "exp",
            Primitive::Log => "log",
            Primitive::Sqrt => "sqrt",
            Primitive::Sinh => "sinh",
            Primitive::Cosh => "cosh",
        }
    }

    pub fn apply(self, s: &TruncatedSeries) -> Result<TruncatedSeries> {
        Ok(match self {
            Primitive::Sin => s.sin(),
            Primitive::Cos => s.cos(),
            Primitive::Exp => s.exp(),
            Primitive::Log => s.ln()?,
            Primitive::Sqrt => s.sqrt()?,
            Primitive::Sinh => s.sinh(),
            Primitive::Cosh => s.cosh(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Primitive, Box<Expr>),
}

impl Expr {
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

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            Expr::Add(a, b) => Some(a.constant_value()? + b.constant_value()?),
            Expr::Sub(a, b) => Some(a.constant_value()? - b.constant_value()?),
            Expr::Mul(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Expr::Div(a, b) => Some(a.constant_value()? / b.constant_value()?),
            Expr::Pow(a, p) => Some(a.constant_value()?.powf(*p)),
            Expr::Call(f, a) => {
                let v = a.constant_value()?;
                Some(match f {
                    Primitive::Sin => v.sin(),
                    Primitive::Cos => v.cos(),
                    Primitive::Exp => v.exp(),
                    Primitive::Log => v.ln(),
                    Primitive::Sqrt => v.sqrt(),
                    Primitive::Sinh => v.sinh(),
                    Primitive::Cosh => v.cosh(),
                })
            }
        }
    }

    /// Evaluates in truncated arithmetic; `inputs[i]` stands for `x_(i+1)`.
    pub fn eval(&self, inputs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let shape = inputs
            .first()
            .ok_or_else(|| Error::InvalidArgument("expression needs at least one input".into()))?;
        self.eval_with(inputs, shape)
    }

    fn eval_with(
        &self,
        inputs: &[TruncatedSeries],
        shape: &TruncatedSeries,
    ) -> Result<TruncatedSeries> {
        match self {
            Expr::Const(c) => Ok(shape.scale(0.0).add_scalar(*c)),
            Expr::Var(i) => inputs.get(*i).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "variable x{} used but only {} inputs given",
                    i + 1,
                    inputs.len()
                ))
            }),
            Expr::Neg(a) => Ok(a.eval_with(inputs, shape)?.scale(-1.0)),
            Expr::Add(a, b) => a
                .eval_with(inputs, shape)?
                .try_add(&b.eval_with(inputs, shape)?),
            Expr::Sub(a, b) => a
                .eval_with(inputs, shape)?
                .try_sub(&b.eval_with(inputs, shape)?),
            Expr::Mul(a, b) => {
                if let Some(c) = a.constant_value() {
                    return Ok(b.eval_with(inputs, shape)?.scale(c));
                }
                if let Some(c) = b.constant_value() {
                    return Ok(a.eval_with(inputs, shape)?.scale(c));
                }
                a.eval_with(inputs, shape)?
                    .try_mul(&b.eval_with(inputs, shape)?)
            }
            Expr::Div(a, b) => {
                let den = b.eval_with(inputs, shape)?;
                if den.value() == 0.0 {
                    return Err(Error::Evaluation("division by zero".into()));
                }
                a.eval_with(inputs, shape)?.try_div(&den)
            }
            Expr::Pow(a, p) => {
                let base = a.eval_with(inputs, shape)?;
                if p.fract() == 0.0 && p.abs() <= 64.0 {
                    if *p < 0.0 && base.value() == 0.0 {
                        return Err(Error::Evaluation("negative power of zero".into()));
                    }
                    base.powi(*p as i32)
                } else {
                    base.powf(*p)
                }
            }
            Expr::Call(f, a) => f.apply(&a.eval_with(inputs, shape)?),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, p) => write!(f, "({a}^{p:?})"),
            Expr::Call(p, a) => write!(f, "{}({a})", p.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: msg.to_string(),
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
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            let p = exponent.constant_value().ok_or(Error::Parse {
                offset: at,
                message: "exponent must be a constant".into(),
            })?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
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
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        self.pos = i;
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse {
                offset: start,
                message: format!("bad number `{text}`"),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(f) = Primitive::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name {
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "e" => return Ok(Expr::Const(std::f64::consts::E)),
            _ => {}
        }
        if let Some(digits) = name.strip_prefix('x') {
            if let Ok(k) = digits.parse::<usize>() {
                if k >= 1 {
                    return Ok(Expr::Var(k - 1));
                }
            }
        }
        Err(Error::Parse {
            offset: start,
            message: format!("unknown identifier `{name}`"),
        })
    }
}
