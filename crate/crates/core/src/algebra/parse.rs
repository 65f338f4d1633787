//! Plain-text polynomial literals.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/')? unary)*  juxtaposition multiplies;
//!                                          divisors must be constants
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' integer)?
//! primary := number | variable | 'i' | '(' expr ')'
//! ```
//!
//! Every letter is its own token, so `2i` is `2*i` and `3+2i` is a complex
//! constant. The two variable names are chosen by the caller: `z`/`w` for
//! curves, `D`/`w` for differential operators written as `(w^2-1)*D^2 + D`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::bipoly::BiPoly;
use super::unipoly::UniPoly;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Imag,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str, vars: [char; 2]) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let ch = bytes[pos] as char;
        let tok = match ch {
            ' ' | '\t' | '\n' | '\r' => {
                pos += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                let start = pos;
                while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                    pos += 1;
                }
                // exponent only when followed by a digit or signed digit
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mut look = pos + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        pos = look;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let text = &src[start..pos];
                let value = text
                    .parse::<f64>()
                    .map_err(|_| Error::parse(start, format!("bad number `{text}`")))?;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c == vars[0] => Tok::Var(0),
            c if c == vars[1] => Tok::Var(1),
            'i' => Tok::Imag,
            c => {
                return Err(Error::parse(
                    pos,
                    format!("unexpected character `{c}` (variables are `{}` and `{}`)", vars[0], vars[1]),
                ))
            }
        };
        out.push((pos, tok));
        pos += ch.len_utf8();
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn expr(&mut self) -> Result<BiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let divisor = self.unary()?;
                    let c = divisor.coeff(0, 0);
                    if divisor.deg_z() > 0 || divisor.deg_w() > 0 || c.is_zero() {
                        return Err(Error::parse(at, "divisor must be a nonzero constant"));
                    }
                    acc = acc.scale(c.inv());
                }
                Some(Tok::Num(_) | Tok::Var(_) | Tok::Imag | Tok::LParen) => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly> {
        let base = self.primary()?;
        if self.peek() != Some(Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.offset();
        match self.peek() {
            Some(Tok::Num(e)) if e >= 0.0 && e.fract() == 0.0 && e <= 4096.0 => {
                self.pos += 1;
                Ok(base.pow(e as usize))
            }
            _ => Err(Error::parse(at, "exponent must be a non-negative integer")),
        }
    }

    fn primary(&mut self) -> Result<BiPoly> {
        let at = self.offset();
        let tok = self.peek().ok_or_else(|| Error::parse(at, "unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(BiPoly::constant(Complex64::new(v, 0.0))),
            Tok::Imag => Ok(BiPoly::constant(Complex64::i())),
            Tok::Var(0) => Ok(BiPoly::z()),
            Tok::Var(_) => Ok(BiPoly::w()),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(Tok::RParen) {
                    return Err(Error::parse(self.offset(), "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(Error::parse(at, "expected a number, variable or `(`")),
        }
    }
}

/// Parses a bivariate literal in variables `vars[0]` (the `z` slot) and
/// `vars[1]` (the `w` slot).
pub fn parse_with_vars(src: &str, vars: [char; 2]) -> Result<BiPoly> {
    let toks = lex(src, vars)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty polynomial"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let value = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(p.offset(), "trailing input"));
    }
    Ok(value)
}

/// Parses a curve `P(z, w)`.
pub fn parse_bipoly(src: &str) -> Result<BiPoly> {
    parse_with_vars(src, ['z', 'w'])
}

/// Parses a polynomial in `w` alone.
pub fn parse_unipoly(src: &str) -> Result<UniPoly> {
    let p = parse_bipoly(src)?;
    if p.deg_z() > 0 {
        return Err(Error::parse(0, format!("`{src}` must not depend on z")));
    }
    Ok(p.row(0))
}

fn write_coeff(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else if c.im < 0.0 {
        write!(f, "({}-{}i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    c: Complex64,
    powers: &[(&str, usize)],
    first: bool,
) -> fmt::Result {
    if !first {
        write!(f, " + ")?;
    }
    let has_vars = powers.iter().any(|&(_, e)| e > 0);
    if !(has_vars && c == Complex64::one()) {
        write_coeff(f, c)?;
        if has_vars {
            write!(f, "*")?;
        }
    }
    let mut sep = "";
    for &(v, e) in powers.iter().filter(|p| p.1 > 0) {
        match e {
            1 => write!(f, "{sep}{v}")?,
            _ => write!(f, "{sep}{v}^{e}")?,
        }
        sep = "*";
    }
    Ok(())
}

pub(crate) fn write_univariate(f: &mut fmt::Formatter<'_>, p: &UniPoly, var: &str) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (k, &c) in p.coeffs().iter().enumerate().rev() {
        if !c.is_zero() {
            write_term(f, c, &[(var, k)], first)?;
            first = false;
        }
    }
    Ok(())
}

pub(crate) fn write_bivariate(f: &mut fmt::Formatter<'_>, p: &BiPoly) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, j, c) in p.terms() {
        write_term(f, c, &[("z", i), ("w", j)], first)?;
        first = false;
    }
    Ok(())
}
