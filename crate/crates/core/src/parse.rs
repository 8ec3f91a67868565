//! Recursive-descent parser for polynomial and rational-function expressions.
//!
//! ```text
//! expr    := ('+' | '-')? term (('+' | '-') term)*
//! term    := unary (('*' | '/')? unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' natural)?
//! primary := number | variable | '(' expr ')'
//! ```
//!
//! Numbers are integers or decimals, read exactly. Juxtaposition multiplies.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactpoly::HomPoly;
use crate::ratpoly::{QPoly, RatFunc};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &src[fs..i];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return err(start, "malformed number");
            }
            let digits = format!("{int_part}{frac_part}");
            let num: BigInt = digits.parse().expect("ascii digits");
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((start, Tok::Num(BigRational::new(num, den))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            // report the whole character, not a UTF-8 fragment
            let ch = src[i..].chars().next().unwrap();
            return err(i, format!("unexpected character '{ch}'"));
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RatFunc, ParseError> {
        let negate = match self.peek() {
            Tok::Op('-') => {
                self.bump();
                true
            }
            Tok::Op('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let at = self.offset();
                    let d = self.unary()?;
                    acc = match acc.div(&d) {
                        Some(q) => q,
                        None => return err(at, "division by zero"),
                    };
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::Op('(') => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let n = match self.bump() {
            Tok::Num(n) if n.is_integer() => n.to_integer(),
            Tok::Op('(') => {
                let n = match self.bump() {
                    Tok::Num(n) if n.is_integer() => n.to_integer(),
                    _ => return err(at, "exponent must be a non-negative integer"),
                };
                if self.bump() != Tok::Op(')') {
                    return err(at, "expected ')' after exponent");
                }
                n
            }
            _ => return err(at, "exponent must be a non-negative integer"),
        };
        let n: u32 = match u32::try_from(n) {
            Ok(n) if n <= MAX_EXPONENT => n,
            _ => return err(at, format!("exponent exceeds {MAX_EXPONENT}")),
        };
        let mut acc = RatFunc::from_poly(QPoly::integer(1));
        for _ in 0..n {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<RatFunc, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(n) => Ok(RatFunc::from_poly(QPoly::constant(n))),
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(RatFunc::from_poly(QPoly::var(i))),
                None => err(
                    at,
                    format!(
                        "unknown variable '{name}' (expected one of {:?})",
                        self.vars
                    ),
                ),
            },
            Tok::Op('(') => {
                let inner = self.expr()?;
                match self.bump() {
                    Tok::Op(')') => Ok(inner),
                    _ => err(self.offset(), "expected ')'"),
                }
            }
            Tok::End => err(at, "unexpected end of input"),
            Tok::Op(c) => err(at, format!("unexpected '{c}'")),
        }
    }
}

/// Parses a rational function in the given variables (at most three).
pub fn parse_ratfunc(src: &str, vars: &[&str]) -> Result<RatFunc, ParseError> {
    assert!(vars.len() <= 3, "at most three variables");
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        vars,
    };
    let r = p.expr()?;
    if *p.peek() != Tok::End {
        return err(p.offset(), "unexpected trailing input");
    }
    Ok(r)
}

/// Parses a polynomial; division is allowed only by nonzero constants.
pub fn parse_poly(src: &str, vars: &[&str]) -> Result<QPoly, ParseError> {
    parse_ratfunc(src, vars)?
        .as_poly()
        .ok_or_else(|| ParseError {
            offset: 0,
            message: "expected a polynomial, found a non-constant denominator".into(),
        })
}

/// Polynomial in `x, y`.
pub fn parse_affine(src: &str) -> Result<QPoly, ParseError> {
    parse_poly(src, &["x", "y"])
}

/// Polynomial in `x` alone.
pub fn parse_univariate(src: &str) -> Result<QPoly, ParseError> {
    parse_poly(src, &["x"])
}

/// Homogeneous polynomial in `X, Y, Z`. Rational coefficients are cleared by
/// the lcm of their denominators.
pub fn parse_hom(src: &str) -> Result<HomPoly, ParseError> {
    let p = parse_poly(src, &["X", "Y", "Z"])?;
    HomPoly::from_rational_terms(p.terms().map(|(e, c)| (*e, c.clone()))).map_err(|_| ParseError {
        offset: 0,
        message: "polynomial is not homogeneous".into(),
    })
}

/// Parses a map written `[P0 : P1 : P2]` in `X, Y, Z`.
pub fn parse_triple(src: &str) -> Result<[HomPoly; 3], ParseError> {
    let trimmed = src.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ParseError {
            offset: 0,
            message: "expected '[P0 : P1 : P2]'".into(),
        })?;
    let parts: Vec<&str> = inner.split(':').collect();
    if parts.len() != 3 {
        return err(0, format!("expected 3 components, found {}", parts.len()));
    }
    let base = src.find('[').unwrap_or(0) + 1;
    let mut offset = base;
    let mut out: [HomPoly; 3] = Default::default();
    for (k, part) in parts.iter().enumerate() {
        out[k] = parse_hom(part).map_err(|e| ParseError {
            offset: offset + e.offset,
            message: e.message,
        })?;
        offset += part.len() + 1;
    }
    Ok(out)
}

/// Exact rational literal such as `3`, `-2/5` or `0.25`.
pub fn parse_rational(src: &str) -> Result<BigRational, ParseError> {
    let f = parse_ratfunc(src, &[])?;
    match f.as_poly().and_then(|p| p.constant_value()) {
        Some(v) => Ok(v),
        None => err(0, "expected a rational number"),
    }
}

/// Rational literal in `(0, 1]`.
pub fn parse_probability(src: &str) -> Result<BigRational, ParseError> {
    let v = parse_rational(src)?;
    if v <= BigRational::zero() || v > BigRational::one() {
        return err(0, format!("weight {v} is not in (0, 1]"));
    }
    Ok(v)
}
