//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' unary)?          right-associative, integer exponent
//! primary := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//! func    := 'exp' | 'log' | 'sin' | 'cos'
//! number  := digits ('.' digits?)? | '.' digits
//! ```
//!
//! Decimal literals are read as exact rationals.

use thiserror::Error;

use super::{Expr, Num, Rational, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("numeric literal out of range")]
    LiteralOutOfRange,
    #[error("variable index out of range")]
    VariableOutOfRange,
    #[error("expected '{0}'")]
    Expected(char),
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.error(ParseErrorKind::UnexpectedChar(c as char))),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position: self.pos }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let exponent = self.unary()?;
        let k = exponent
            .as_const()
            .and_then(Num::as_i32)
            .ok_or(ParseError { kind: ParseErrorKind::NonIntegerExponent, position: at })?;
        Ok(base.powi(k))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error(ParseErrorKind::Expected(')')));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.identifier();
        }
        Err(self.error(ParseErrorKind::UnexpectedChar(c as char)))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while let Some(c) = self.peek().filter(u8::is_ascii_digit) {
            int_digits.push(c as char);
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while let Some(c) = self.peek().filter(u8::is_ascii_digit) {
                frac_digits.push(c as char);
                self.pos += 1;
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(ParseError { kind: ParseErrorKind::UnexpectedChar('.'), position: start });
        }
        let out_of_range = ParseError { kind: ParseErrorKind::LiteralOutOfRange, position: start };
        let digits = format!("{int_digits}{frac_digits}");
        let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| out_of_range.clone())? };
        let denom = u32::try_from(frac_digits.len())
            .ok()
            .and_then(|k| 10i128.checked_pow(k))
            .ok_or(out_of_range)?;
        Ok(Expr::constant(Num::Rat(Rational::new(numer, denom))))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if let Some(index) = name.strip_prefix('x').filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())) {
            let v: usize = index
                .parse()
                .ok()
                .filter(|&v| v < MAX_VARS)
                .ok_or(ParseError { kind: ParseErrorKind::VariableOutOfRange, position: start })?;
            return Ok(Expr::var(v));
        }
        let func: fn(&Expr) -> Expr = match name {
            "exp" => Expr::exp,
            "log" => Expr::log,
            "sin" => Expr::sin,
            "cos" => Expr::cos,
            _ => {
                return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name.to_string()), position: start });
            }
        };
        if !self.eat(b'(') {
            return Err(self.error(ParseErrorKind::Expected('(')));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.error(ParseErrorKind::Expected(')')));
        }
        Ok(func(&arg))
    }
}
