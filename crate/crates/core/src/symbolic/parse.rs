//! Text syntax for polynomials, e.g. `a1* a1 - 1 - mu^2 a1 a1*` or `3/2 mu a2 a1*`.
//!
//! A polynomial is a signed sum of terms; a term is a juxtaposition of
//! rational numbers, `mu` / `mu^k` factors and letters `aK` / `aK*`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::mupoly::MuPoly;
use super::ncpoly::NcPolynomial;
use super::Letter;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse::<BigInt>().expect("digits parse"))
    }

    fn small_integer(&mut self, what: &str) -> Result<usize> {
        let start = self.pos;
        let n = self.integer()?;
        n.try_into().or_else(|_| self.err(start, format!("{what} is too large")))
    }

    fn polynomial(&mut self) -> Result<NcPolynomial> {
        let mut out = NcPolynomial::zero();
        self.skip_ws();
        if self.peek().is_none() {
            return self.err(self.pos, "empty polynomial");
        }
        let mut first = true;
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else { break };
            let mut negative = false;
            match c {
                b'+' | b'-' => {
                    negative = c == b'-';
                    self.pos += 1;
                }
                _ if !first => return self.err(self.pos, "expected '+' or '-' between terms"),
                _ => {}
            }
            first = false;
            let mut term = self.term()?;
            if negative {
                term = -&term;
            }
            out += &term;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<NcPolynomial> {
        let mut coeff = BigRational::one();
        let mut mu_exp = 0u32;
        let mut word = Vec::new();
        let mut factors = 0;
        loop {
            self.skip_ws();
            let start = self.pos;
            match self.peek() {
                None | Some(b'+') | Some(b'-') => break,
                Some(c) if c.is_ascii_digit() => {
                    let num = self.integer()?;
                    let mut value = BigRational::from_integer(num);
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let den_pos = self.pos;
                        let den = self.integer()?;
                        if den.is_zero() {
                            return self.err(den_pos, "zero denominator");
                        }
                        value /= BigRational::from_integer(den);
                    }
                    coeff *= value;
                }
                Some(b'm') => {
                    if !self.src[self.pos..].starts_with(b"mu") {
                        return self.err(start, "unknown token, expected 'mu'");
                    }
                    self.pos += 2;
                    let mut exp = 1u32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let e = self.small_integer("exponent")?;
                        exp = u32::try_from(e).or_else(|_| self.err(start, "exponent is too large"))?;
                    }
                    mu_exp += exp;
                }
                Some(b'a') | Some(b'x') => {
                    self.pos += 1;
                    let idx_pos = self.pos;
                    let index = self.small_integer("generator index")?;
                    if index == 0 || index > self.d {
                        return self.err(
                            idx_pos,
                            format!("generator index {index} outside 1..={}", self.d),
                        );
                    }
                    let starred = self.peek() == Some(b'*');
                    if starred {
                        self.pos += 1;
                    }
                    word.push(Letter::new(index, starred));
                }
                Some(c) => return self.err(start, format!("unexpected character '{}'", c as char)),
            }
            factors += 1;
        }
        if factors == 0 {
            return self.err(self.pos, "expected a term");
        }
        Ok(NcPolynomial::term(word, MuPoly::monomial(coeff, mu_exp)))
    }
}

/// Parses a polynomial whose letters must have indices in `1..=d`.
pub fn parse_polynomial(text: &str, d: usize) -> Result<NcPolynomial> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        d,
    };
    parser.polynomial()
}
