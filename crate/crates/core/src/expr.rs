//! A small arithmetic language in the variables `t` and `s`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 's' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-2^2 == -4`) and is right associative.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable `s` is referenced but not bound")]
    UnboundVariable,
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("evaluation produced a non-finite value")]
    NumericOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Parsed expression. `pow(a, b)` parses to the same node as `a ^ b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let tokens = lex(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            len: src.len(),
        };
        let e = parser.expr()?;
        match parser.peek() {
            None => Ok(e),
            Some((off, tok)) => Err(ExprError::Parse {
                offset: off,
                message: format!("unexpected {}", tok.describe()),
            }),
        }
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn uses_s(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::S,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_s(),
            Expr::Binary(_, l, r) => l.uses_s() || r.uses_s(),
        }
    }

    /// Evaluates with `t` bound and `s` optionally bound. Any NaN or infinite
    /// result is reported as [`ExprError::NumericOverflow`].
    pub fn eval(&self, t: f64, s: Option<f64>) -> Result<f64, ExprError> {
        let v = self.eval_raw(t, s)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NumericOverflow)
        }
    }

    fn eval_raw(&self, t: f64, s: Option<f64>) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::S) => s.ok_or(ExprError::UnboundVariable)?,
            Expr::Neg(e) => -e.eval_raw(t, s)?,
            Expr::Binary(op, l, r) => {
                let (a, b) = (l.eval_raw(t, s)?, r.eval_raw(t, s)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval_raw(t, s)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log if x <= 0.0 => return Err(ExprError::Domain { func: "log", arg: x }),
                    Func::Log => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt if x < 0.0 => return Err(ExprError::Domain { func: "sqrt", arg: x }),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                }
            }
        })
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Fully parenthesised output; parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Op(c) => format!("operator `{c}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((start, Token::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((start, Token::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Token::RParen));
                i += 1;
            }
            b',' => {
                out.push((start, Token::Comma));
                i += 1;
            }
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
                let v: f64 = text.parse().map_err(|_| ExprError::Parse {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((start, Token::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Parse {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(o, t)| (*o, t))
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn eof_error(&self, what: &str) -> ExprError {
        ExprError::Parse {
            offset: self.len,
            message: format!("unexpected end of input, expected {what}"),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ExprError> {
        match self.next() {
            Some((_, tok)) if tok == want => Ok(()),
            Some((off, tok)) => Err(ExprError::Parse {
                offset: off,
                message: format!("expected {what}, found {}", tok.describe()),
            }),
            None => Err(self.eof_error(what)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some((_, Token::Op(c @ ('+' | '-')))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some((_, Token::Op(c @ ('*' | '/')))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some((_, Token::Op('-'))) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if let Some((_, Token::Op('^'))) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let (off, tok) = self.next().ok_or_else(|| self.eof_error("an operand"))?;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var(Var::T)),
                "s" => Ok(Expr::Var(Var::S)),
                "pow" => {
                    self.expect(Token::LParen, "`(` after pow")?;
                    let base = self.expr()?;
                    self.expect(Token::Comma, "`,` in pow(base, exponent)")?;
                    let exponent = self.expr()?;
                    self.expect(Token::RParen, "`)`")?;
                    Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
                }
                other => match Func::lookup(other) {
                    Some(func) => {
                        self.expect(Token::LParen, &format!("`(` after {other}"))?;
                        let arg = self.expr()?;
                        self.expect(Token::RParen, "`)`")?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => Err(ExprError::UnknownIdentifier {
                        name: name.clone(),
                        offset: off,
                    }),
                },
            },
            other => Err(ExprError::Parse {
                offset: off,
                message: format!("expected an operand, found {}", other.describe()),
            }),
        }
    }
}
