//! Scalar literal grammar:
//!
//! ```text
//! scalar   ::= ["-"] term (("+" | "-") term)*
//! term     ::= atom ("*" atom)*
//! atom     ::= rational | "sqrt(" rational ")" | "log(" rational ")"
//!            | symbol-name ["^" ["-"] int]
//! rational ::= int | int "/" int
//! ```
//!
//! Whitespace is allowed between tokens.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{SymScalar, SymbolRegistry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseScalarError {
    pub input: String,
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

impl ParseScalarError {
    pub fn new(input: &str, column: usize, message: &str) -> Self {
        ParseScalarError { input: input.to_string(), column, message: message.to_string() }
    }
}

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {} in {:?}", self.message, self.column, self.input)
    }
}

impl std::error::Error for ParseScalarError {}

struct Cursor<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, chars: src.chars().collect(), pos: 0 }
    }

    fn err(&self, msg: &str) -> ParseScalarError {
        ParseScalarError::new(self.src, self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseScalarError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseScalarError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("digits"))
    }

    fn rational(&mut self) -> Result<BigRational, ParseScalarError> {
        let neg = self.eat('-');
        let num = self.integer()?;
        let den = if self.eat('/') {
            let at = self.pos;
            let d = self.integer()?;
            if d.is_zero() {
                return Err(ParseScalarError::new(self.src, at + 1, "zero denominator"));
            }
            d
        } else {
            BigInt::from(1)
        };
        let q = BigRational::new(num, den);
        Ok(if neg { -q } else { q })
    }

    fn identifier(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
            return None;
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn atom(&mut self, reg: &SymbolRegistry) -> Result<SymScalar, ParseScalarError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(SymScalar::rational(self.rational()?)),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let at = self.pos;
                let name = self.identifier().expect("identifier start");
                match name.as_str() {
                    "sqrt" => {
                        self.expect('(')?;
                        let q = self.rational()?;
                        self.expect(')')?;
                        SymScalar::sqrt_rational(&q)
                            .ok_or_else(|| ParseScalarError::new(self.src, at + 1, "square root of a negative rational"))
                    }
                    "log" => {
                        self.expect('(')?;
                        let q = self.rational()?;
                        self.expect(')')?;
                        if !q.is_positive() {
                            return Err(ParseScalarError::new(self.src, at + 1, "log of a non-positive rational"));
                        }
                        SymScalar::log_of_rational(&q)
                            .ok_or_else(|| ParseScalarError::new(self.src, at + 1, "log argument too large"))
                    }
                    _ => {
                        let base = reg
                            .lookup(&name)
                            .cloned()
                            .ok_or_else(|| ParseScalarError::new(self.src, at + 1, &format!("unknown symbol '{name}'")))?;
                        if !self.eat('^') {
                            return Ok(base);
                        }
                        let neg = self.eat('-');
                        let e: u32 = self
                            .integer()?
                            .try_into()
                            .map_err(|_| self.err("exponent too large"))?;
                        if !neg {
                            return Ok(base.pow(e));
                        }
                        base.try_inv()
                            .map(|inv| inv.pow(e))
                            .ok_or_else(|| ParseScalarError::new(self.src, at + 1, "negative power of a non-monomial symbol"))
                    }
                }
            }
            _ => Err(self.err("expected a number, sqrt(...), log(...) or a symbol")),
        }
    }

    fn term(&mut self, reg: &SymbolRegistry) -> Result<SymScalar, ParseScalarError> {
        let mut acc = self.atom(reg)?;
        while self.eat('*') {
            acc = acc.mul(&self.atom(reg)?);
        }
        Ok(acc)
    }

    fn scalar(&mut self, reg: &SymbolRegistry) -> Result<SymScalar, ParseScalarError> {
        let neg = self.eat('-');
        let mut acc = self.term(reg)?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term(reg)?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term(reg)?);
            } else {
                break;
            }
        }
        if self.peek().is_some() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(acc)
    }
}

pub fn parse_scalar(src: &str, reg: &SymbolRegistry) -> Result<SymScalar, ParseScalarError> {
    Cursor::new(src).scalar(reg)
}

pub fn parse_rational(src: &str) -> Result<BigRational, ParseScalarError> {
    let mut c = Cursor::new(src);
    let q = c.rational()?;
    if c.peek().is_some() {
        return Err(c.err("unexpected trailing input"));
    }
    Ok(q)
}
