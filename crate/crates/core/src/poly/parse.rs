//! Tiny infix parser: `"1 - 3x^2y^2 + x^2y^4 + x^4y^2"`, `"(x1+1)*(x2-1/2)"`.
//!
//! Variables are `x, y, z, w` (coordinates 1–4) or `x1, x2, …` / `x_1, …`.
//! Juxtaposition multiplies; `/` only divides by rational constants.

use num_rational::BigRational;
use num_traits::Zero;

use super::{Exponent, Poly};
use crate::error::{Error, Result};
use crate::scalar::parse_rational;

type Rp = Poly<BigRational>;

pub fn parse_polynomial(dim: usize, src: &str) -> Result<Rp> {
    let tokens = tokenize(src)?;
    let mut p = Parser { dim, tokens, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!("trailing input in {src:?}")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            'x' | 'y' | 'z' | 'w' => {
                i += 1;
                let mut j = i;
                if j < chars.len() && chars[j] == '_' {
                    j += 1;
                }
                let start = j;
                while c == 'x' && j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > start {
                    let k: usize = chars[start..j].iter().collect::<String>().parse().unwrap();
                    if k == 0 {
                        return Err(Error::Parse("variables are numbered from 1".into()));
                    }
                    out.push(Tok::Var(k - 1));
                    i = j;
                } else {
                    out.push(Tok::Var(match c {
                        'x' => 0,
                        'y' => 1,
                        'z' => 2,
                        _ => 3,
                    }));
                }
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    dim: usize,
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Rp> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Rp> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.power()?;
                    if d.total_degree().unwrap_or(0) > 0 || d.is_zero() {
                        return Err(Error::Parse("division by a non-constant or zero".into()));
                    }
                    let inv = BigRational::from_integer(1.into()) / d.constant_term();
                    acc = acc.scale(&inv);
                }
                Some(Tok::Num(_)) | Some(Tok::Var(_)) | Some(Tok::LParen) => {
                    acc = acc * self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Rp> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Rp> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(n)) => {
                    let k: u32 = n.parse().map_err(|_| Error::Parse(format!("bad exponent {n:?}")))?;
                    return Ok(base.pow(k));
                }
                other => return Err(Error::Parse(format!("expected exponent, found {other:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Rp> {
        match self.next() {
            Some(Tok::Num(n)) => {
                let r = parse_rational(&n)?;
                Ok(Poly::constant(self.dim, r))
            }
            Some(Tok::Var(j)) => {
                if j >= self.dim {
                    return Err(Error::Parse(format!("variable x{} outside dimension {}", j + 1, self.dim)));
                }
                Ok(Poly::monomial(Exponent::unit(self.dim, j), BigRational::from_integer(1.into())))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl Poly<BigRational> {
    /// Parses an infix expression; see the module docs for the accepted syntax.
    pub fn parse(dim: usize, src: &str) -> Result<Self> {
        let p = parse_polynomial(dim, src)?;
        debug_assert!(p.terms().all(|(_, c)| !c.is_zero()));
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn parses_motzkin() {
        let m = Poly::parse(2, "1 - 3x^2y^2 + x^2y^4 + x^4y^2").unwrap();
        assert_eq!(m.num_terms(), 4);
        assert_eq!(m.coeff(&Exponent::new(vec![2, 2])), rat_int(-3));
        assert_eq!(m.total_degree(), Some(6));
    }

    #[test]
    fn parses_products_and_fractions() {
        let p = Poly::parse(2, "(x1+1)*(x2 - 1/2)").unwrap();
        assert_eq!(p.coeff(&Exponent::new(vec![0, 0])), rat(-1, 2));
        assert_eq!(p.coeff(&Exponent::new(vec![1, 1])), rat_int(1));
        assert!(Poly::parse(1, "y").is_err());
        assert!(Poly::parse(1, "x/x").is_err());
    }
}
