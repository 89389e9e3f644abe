//! Grammar, with implicit multiplication (`2i`, `3z`, `2(z+1)`) binding
//! like `*` and `/`, left to right:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/' | <implicit>) unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'z' | 'i' | '(' expr ')'
//! number := digits ('.' digits)?
//! ```
//!
//! So `2i/5` is `(2i)/5` and `-z^2` is `-(z^2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::QComplex;
use super::rational::RationalFunction;
use super::EquivalenceError;

const MAX_EXPONENT: u32 = 10_000;

pub fn parse_rational(text: &str) -> Result<RationalFunction, EquivalenceError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let r = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected character"));
    }
    Ok(r)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> EquivalenceError {
        EquivalenceError::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<RationalFunction, EquivalenceError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, EquivalenceError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| EquivalenceError::Parse {
                        position: at,
                        message: "division by zero".into(),
                    })?;
                }
                Some(c)
                    if c.is_ascii_digit() || c == b'z' || c == b'i' || c == b'(' || c == b'.' =>
                {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction, EquivalenceError> {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction, EquivalenceError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a nonnegative integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let e: u32 = digits
            .parse()
            .ok()
            .filter(|&e| e <= MAX_EXPONENT)
            .ok_or_else(|| self.error("exponent too large"))?;
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<RationalFunction, EquivalenceError> {
        self.skip_ws();
        match self.peek() {
            Some(b'z') => {
                self.pos += 1;
                Ok(RationalFunction::z())
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(RationalFunction::constant(QComplex::i()))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<RationalFunction, EquivalenceError> {
        let start = self.pos;
        let mut int_digits = String::new();
        while let Some(c) = self.peek().filter(u8::is_ascii_digit) {
            int_digits.push(c as char);
            self.pos += 1;
        }
        let mut frac_digits = String::new();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while let Some(c) = self.peek().filter(u8::is_ascii_digit) {
                frac_digits.push(c as char);
                self.pos += 1;
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let all = format!("{int_digits}{frac_digits}");
        let numer: BigInt = if all.is_empty() {
            BigInt::zero()
        } else {
            all.parse().expect("digits")
        };
        let denom = num_traits::pow(BigInt::from(10), frac_digits.len());
        let value = if denom.is_one() {
            BigRational::from_integer(numer)
        } else {
            BigRational::new(numer, denom)
        };
        Ok(RationalFunction::constant(QComplex::real(value)))
    }
}
