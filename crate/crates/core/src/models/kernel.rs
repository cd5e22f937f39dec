//! Covariance kernels on [0,1]^2 and the expression mini-grammar that lets
//! config files define custom kernels:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | primary
//! primary:= number | 's' | 't' | '(' expr ')'
//!         | ('min' | 'max' | 'pow') '(' expr ',' expr ')'
//! ```

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Parsed kernel expression over the variables `s` and `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelExpr {
    Const(f64),
    S,
    T,
    Neg(Box<KernelExpr>),
    Add(Box<KernelExpr>, Box<KernelExpr>),
    Sub(Box<KernelExpr>, Box<KernelExpr>),
    Mul(Box<KernelExpr>, Box<KernelExpr>),
    Div(Box<KernelExpr>, Box<KernelExpr>),
    Min(Box<KernelExpr>, Box<KernelExpr>),
    Max(Box<KernelExpr>, Box<KernelExpr>),
    Pow(Box<KernelExpr>, Box<KernelExpr>),
}

impl KernelExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let expr = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::KernelExpr(format!(
                "unexpected trailing input at token {}",
                p.pos
            )));
        }
        Ok(expr)
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match self {
            KernelExpr::Const(c) => *c,
            KernelExpr::S => s,
            KernelExpr::T => t,
            KernelExpr::Neg(a) => -a.eval(s, t),
            KernelExpr::Add(a, b) => a.eval(s, t) + b.eval(s, t),
            KernelExpr::Sub(a, b) => a.eval(s, t) - b.eval(s, t),
            KernelExpr::Mul(a, b) => a.eval(s, t) * b.eval(s, t),
            KernelExpr::Div(a, b) => a.eval(s, t) / b.eval(s, t),
            KernelExpr::Min(a, b) => a.eval(s, t).min(b.eval(s, t)),
            KernelExpr::Max(a, b) => a.eval(s, t).max(b.eval(s, t)),
            KernelExpr::Pow(a, b) => a.eval(s, t).powf(b.eval(s, t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::KernelExpr(format!("bad number '{text}'")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            other => {
                return Err(Error::KernelExpr(format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => Err(Error::KernelExpr(format!("expected {tok:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<KernelExpr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus => {
                    self.next();
                    lhs = KernelExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.next();
                    lhs = KernelExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<KernelExpr> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Star => {
                    self.next();
                    lhs = KernelExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.next();
                    lhs = KernelExpr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<KernelExpr> {
        if self.peek() == Some(&Token::Minus) {
            self.next();
            return Ok(KernelExpr::Neg(Box::new(self.factor()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<KernelExpr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(KernelExpr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "s" => Ok(KernelExpr::S),
                "t" => Ok(KernelExpr::T),
                "min" | "max" | "pow" => {
                    self.expect(Token::LParen)?;
                    let a = self.expr()?;
                    self.expect(Token::Comma)?;
                    let b = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(match name.as_str() {
                        "min" => KernelExpr::Min(Box::new(a), Box::new(b)),
                        "max" => KernelExpr::Max(Box::new(a), Box::new(b)),
                        _ => KernelExpr::Pow(Box::new(a), Box::new(b)),
                    })
                }
                other => Err(Error::KernelExpr(format!("unknown identifier '{other}'"))),
            },
            other => Err(Error::KernelExpr(format!("unexpected token {other:?}"))),
        }
    }
}

/// A symmetric kernel on [0,1]^2.
#[derive(Clone)]
pub enum KernelSpec {
    /// G(s,t) = min(s,t)
    BrownianMotion,
    /// G(s,t) = min(s,t) - s t
    BrownianBridge,
    /// Kernel defined by a parsed expression.
    Custom { name: String, expr: KernelExpr },
    /// Kernel backed by an arbitrary function (programmatic use).
    Function { name: String, f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::BrownianMotion => write!(f, "BrownianMotion"),
            KernelSpec::BrownianBridge => write!(f, "BrownianBridge"),
            KernelSpec::Custom { name, .. } => write!(f, "Custom({name})"),
            KernelSpec::Function { name, .. } => write!(f, "Function({name})"),
        }
    }
}

impl KernelSpec {
    /// Parse a custom kernel and validate its symmetry on a sampled grid.
    pub fn custom(name: impl Into<String>, src: &str) -> Result<Self> {
        let spec = KernelSpec::Custom { name: name.into(), expr: KernelExpr::parse(src)? };
        spec.validate_symmetry()?;
        Ok(spec)
    }

    pub fn function(
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = KernelSpec::Function { name: name.into(), f: Arc::new(f) };
        spec.validate_symmetry()?;
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        match self {
            KernelSpec::BrownianMotion => "brownian_motion",
            KernelSpec::BrownianBridge => "brownian_bridge",
            KernelSpec::Custom { name, .. } | KernelSpec::Function { name, .. } => name,
        }
    }

    pub fn evaluate(&self, s: f64, t: f64) -> f64 {
        match self {
            KernelSpec::BrownianMotion => s.min(t),
            KernelSpec::BrownianBridge => s.min(t) - s * t,
            KernelSpec::Custom { expr, .. } => expr.eval(s, t),
            KernelSpec::Function { f, .. } => f(s, t),
        }
    }

    /// evaluator(s,t) == evaluator(t,s) on a sampled grid, to 1e-14 of the
    /// local magnitude.
    pub fn validate_symmetry(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
        for &s in &grid {
            for &t in &grid {
                let a = self.evaluate(s, t);
                let b = self.evaluate(t, s);
                if (a - b).abs() > 1e-14 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::KernelExpr(format!(
                        "kernel '{}' asymmetric at ({s},{t}): {a} vs {b}",
                        self.name()
                    )));
                }
            }
        }
        Ok(())
    }
}
