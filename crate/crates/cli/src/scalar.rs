//! Scalar arguments such as `2^-20`, `1e-6`, `pi/8` or `3*pi/16`.
//!
//! Grammar (whitespace around tokens is ignored):
//!
//! ```text
//! scalar  := ['-'] product ['/' product]
//! product := factor ('*' factor)*
//! factor  := atom ['^' ['-' | '+'] atom]
//! atom    := number | "pi"
//! ```

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("empty scalar")]
    Empty,
    #[error("malformed scalar {input:?} at byte {pos}: {reason}")]
    Malformed { input: String, pos: usize, reason: &'static str },
    #[error("scalar {0:?} is not finite")]
    NonFinite(String),
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &'static str) -> ScalarError {
        ScalarError::Malformed { input: self.input.to_string(), pos: self.pos, reason }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.as_bytes().get(self.pos).copied()
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

    fn atom(&mut self) -> Result<f64, ScalarError> {
        self.skip_ws();
        let rest = &self.input[self.pos..];
        if rest.starts_with("pi") {
            self.pos += 2;
            return Ok(std::f64::consts::PI);
        }
        let bytes = rest.as_bytes();
        let mut end = 0;
        let digits = |end: &mut usize| {
            let start = *end;
            while bytes.get(*end).is_some_and(u8::is_ascii_digit) {
                *end += 1;
            }
            *end - start
        };
        let mut mantissa = digits(&mut end);
        if bytes.get(end) == Some(&b'.') {
            end += 1;
            mantissa += digits(&mut end);
        }
        if mantissa == 0 {
            return Err(self.err("expected a number or pi"));
        }
        if matches!(bytes.get(end), Some(b'e' | b'E')) {
            let mut e = end + 1;
            if matches!(bytes.get(e), Some(b'+' | b'-')) {
                e += 1;
            }
            if digits(&mut e) > 0 {
                end = e;
            }
        }
        let v: f64 = rest[..end].parse().map_err(|_| self.err("bad number"))?;
        self.pos += end;
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64, ScalarError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        let exp = sign * self.atom()?;
        Ok(base.powf(exp))
    }

    fn product(&mut self) -> Result<f64, ScalarError> {
        let mut v = self.factor()?;
        while self.eat(b'*') {
            v *= self.factor()?;
        }
        Ok(v)
    }

    fn scalar(&mut self) -> Result<f64, ScalarError> {
        let sign = if self.eat(b'-') { -1.0 } else { 1.0 };
        let mut v = sign * self.product()?;
        if self.eat(b'/') {
            v /= self.product()?;
        }
        self.skip_ws();
        if self.pos != self.input.len() {
            return Err(self.err("trailing characters"));
        }
        Ok(v)
    }
}

/// Parses a scalar argument; the result is always finite.
pub fn parse_scalar(s: &str) -> Result<f64, ScalarError> {
    if s.trim().is_empty() {
        return Err(ScalarError::Empty);
    }
    let v = Parser { input: s, pos: 0 }.scalar()?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScalarError::NonFinite(s.to_string()))
    }
}

/// Comma-separated list of scalars.
pub fn parse_scalar_list(s: &str) -> Result<Vec<f64>, ScalarError> {
    s.split(',').map(parse_scalar).collect()
}
