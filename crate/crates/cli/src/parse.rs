//! Expression grammar.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("+" | "-") unary | power
//! power  := atom ("^" integer)?
//! atom   := integer | "hbar" | "i" | variable | "(" expr ")"
//! ```
//!
//! Variables are `qQ`, `pQ`, `qC`, `pC` with an optional index (`qC2`).
//! Division is only allowed by a nonzero constant.

use std::fmt;

use hybrid_core::{Coefficient, Expression, Sector, VariableId};
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}{}", fmt_expected(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

fn fmt_expected(expected: &[&'static str]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
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

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

const OPERAND: &[&str] = &["integer", "variable", "`hbar`", "`i`", "`(`", "`-`", "`+`"];
const AFTER_OPERAND: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&ch) = chars.peek() {
        let pos = Pos { line, column };
        if ch == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if ch.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        let tok = if ch.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                s.push(d);
                chars.next();
            }
            column += s.len();
            Tok::Int(s.parse().expect("ascii digits"))
        } else if ch.is_ascii_alphabetic() {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_alphanumeric() || **d == '_') {
                s.push(d);
                chars.next();
            }
            column += s.len();
            Tok::Ident(s)
        } else {
            let t = match ch {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                        expected: OPERAND.to_vec(),
                    })
                }
            };
            chars.next();
            column += 1;
            t
        };
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

fn variable(name: &str) -> Option<VariableId> {
    let mut it = name.chars();
    let kind = it.next()?;
    let sector = match it.next()? {
        'Q' => Sector::Q,
        'C' => Sector::C,
        _ => return None,
    };
    let rest = it.as_str();
    let index = if rest.is_empty() {
        0
    } else if rest.chars().all(|c| c.is_ascii_digit()) && (rest == "0" || !rest.starts_with('0')) {
        rest.parse().ok()?
    } else {
        return None;
    };
    match kind {
        'q' => Some(VariableId::position(sector, index)),
        'p' => Some(VariableId::momentum(sector, index)),
        _ => None,
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, message: String, expected: &[&'static str]) -> ParseError {
        ParseError { line: pos.line, column: pos.column, message, expected: expected.to_vec() }
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        self.error_at(self.pos(), format!("unexpected {}", self.peek()), expected)
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let divisor = self.unary()?;
                    let inv = divisor.as_constant().and_then(|c| c.inv()).ok_or_else(|| {
                        self.error_at(
                            pos,
                            format!("cannot divide by `{divisor}`: divisor must be a nonzero constant"),
                            &[],
                        )
                    })?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e = u32::try_from(&n)
                    .ok()
                    .filter(|e| *e <= MAX_EXPONENT)
                    .ok_or_else(|| self.error_at(pos, format!("exponent {n} is larger than {MAX_EXPONENT}"), &[]))?;
                Ok(base.pow(e))
            }
            other => Err(self.error_at(pos, format!("unexpected {other} after `^`"), &["nonnegative integer"])),
        }
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expression::constant(Coefficient::real(BigRational::from_integer(n))))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "hbar" => Ok(Expression::hbar()),
                    "i" => Ok(Expression::constant(Coefficient::i())),
                    _ => variable(&name).map(Expression::var).ok_or_else(|| {
                        self.error_at(
                            pos,
                            format!("unknown identifier `{name}`"),
                            &["`qQ`", "`pQ`", "`qC`", "`pC`", "`hbar`", "`i`"],
                        )
                    }),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["`)`", "`+`", "`-`", "`*`", "`/`", "`^`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }
}

/// Parse an expression in canonical form.
pub fn parse(src: &str) -> Result<Expression, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(AFTER_OPERAND));
    }
    Ok(e)
}

/// Canonical text of `e`; `parse(&format(e)) == e`.
pub fn format(e: &Expression) -> String {
    e.to_string()
}
