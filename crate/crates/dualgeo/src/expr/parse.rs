//! Recursive-descent parser for the component expression grammar.
//!
//! Precedence, low to high: additive `+ -`, multiplicative `* /`, unary
//! minus, power `^` (right associative), atoms. Whitespace is
//! insignificant. Errors carry the byte offset of the offending token.

use std::sync::Arc;

use super::{Expr, Func};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not a constant expression")]
    NonConstantExponent { offset: usize },
    #[error("empty expression")]
    Empty,
}

/// Parse `text` against the ordered list of allowed variable names.
pub fn parse(text: &str, allowed_vars: &[Arc<str>]) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        vars: allowed_vars,
    };
    let e = p.additive()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    vars: &'a [Arc<str>],
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.multiplicative()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.multiplicative()?;
                    acc = Expr::add(acc, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.multiplicative()?;
                    acc = Expr::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expr::mul(acc, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp_offset = {
                self.skip_ws();
                self.pos
            };
            // right-associative; unary minus allowed in the exponent
            let exp = self.unary()?;
            if !exp.is_constant() {
                return Err(ParseError::NonConstantExponent { offset: exp_offset });
            }
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.additive()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                // exponent part: e[+-]?digits
                let mut j = self.pos + 1;
                if matches!(self.bytes.get(j), Some(b'+') | Some(b'-')) {
                    j += 1;
                }
                if matches!(self.bytes.get(j), Some(d) if d.is_ascii_digit()) {
                    self.pos = j;
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match s.parse::<f64>() {
            Ok(v) => Ok(Expr::num(v)),
            Err(_) => {
                self.pos = start;
                Err(self.syntax(format!("malformed number `{s}`")))
            }
        }
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if let Some(f) = Func::from_name(name) {
            if self.eat(b'(') {
                let arg = self.additive()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)` after call argument"));
                }
                return Ok(Expr::call(f, arg));
            }
            // fall through: a function name used bare must be a variable
        }
        if self.vars.iter().any(|v| v.as_ref() == name) {
            Ok(Expr::var(name))
        } else {
            Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            })
        }
    }
}
