//! Expression grammar: rendering and parsing of [`DiffPoly`] values.
//!
//! Jets render as `u`, `u1`, `u2`, ... for letter-only generator names and as
//! `k0`, `k0_1`, `k_m1_2`, ... otherwise. Coefficients are `p/q`, exponents
//! are integers or parenthesized halves such as `u^(-5/2)`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::alphabet::Alphabet;
use super::calculus::monomial_pow;
use super::mono::{Exponent, Mono};
use super::poly::DiffPoly;
use super::{AlgebraError, Rational};

pub struct TextDisplay<'a> {
    poly: &'a DiffPoly,
    alphabet: &'a Alphabet,
}

impl DiffPoly {
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> TextDisplay<'a> {
        TextDisplay {
            poly: self,
            alphabet,
        }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.display(alphabet).to_string()
    }

    pub fn to_latex(&self, alphabet: &Alphabet) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let unit = a.is_one() && !m.is_one();
            if !unit {
                if a.is_integer() {
                    s.push_str(&a.numer().to_string());
                } else {
                    s.push_str(&format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom()));
                }
            }
            for (j, &(v, e)) in m.factors().iter().enumerate() {
                if j > 0 || !unit {
                    s.push(' ');
                }
                s.push_str(&alphabet.jet_latex(v));
                if e != Exponent::ONE {
                    let (n, d) = e.ratio();
                    if d == 1 {
                        s.push_str(&format!("^{{{n}}}"));
                    } else {
                        s.push_str(&format!("^{{{n}/{d}}}"));
                    }
                }
            }
        }
        s
    }

    pub fn parse(src: &str, alphabet: &Alphabet) -> Result<DiffPoly, AlgebraError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            alphabet,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(out)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for TextDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            let mut first = true;
            if !a.is_one() || m.is_one() {
                write_rational(f, &a)?;
                first = false;
            }
            for &(v, e) in m.factors() {
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(&self.alphabet.jet_name(v))?;
                if e != Exponent::ONE {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> AlgebraError {
        AlgebraError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), AlgebraError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<DiffPoly, AlgebraError> {
        let mut acc = DiffPoly::zero();
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc.sub_assign_ref(&t);
            } else {
                acc.add_assign_ref(&t);
            }
            sign = match self.peek() {
                Some(b'+') => 1,
                Some(b'-') => -1,
                _ => return Ok(acc),
            };
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<DiffPoly, AlgebraError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = acc.mul_ref(&f);
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<num_bigint::BigInt, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn small_int(&mut self) -> Result<i32, AlgebraError> {
        let n = self.integer()?;
        i32::try_from(n).map_err(|_| self.error("exponent out of range"))
    }

    fn exponent(&mut self) -> Result<(i32, u32), AlgebraError> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let n = self.small_int()?;
            let d = if self.eat(b'/') { self.small_int()? } else { 1 };
            self.expect(b')')?;
            if d <= 0 {
                return Err(self.error("bad exponent denominator"));
            }
            Ok((if neg { -n } else { n }, d as u32))
        } else {
            Ok((self.small_int()?, 1))
        }
    }

    fn factor(&mut self) -> Result<DiffPoly, AlgebraError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let (num, den) = self.exponent()?;
        let g = num_integer::gcd(num, den as i32).max(1);
        let (num, den) = (num / g, den / g as u32);
        if den == 1 && num >= 0 {
            return Ok(base.pow(num as u32));
        }
        monomial_pow(&base, num, den, self.alphabet)
    }

    fn primary(&mut self) -> Result<DiffPoly, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let d = if self.eat(b'/') {
                    self.integer()?
                } else {
                    num_bigint::BigInt::one()
                };
                if d.is_zero() {
                    return Err(self.error("division by zero"));
                }
                Ok(DiffPoly::constant(Rational::new(n, d)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let v = self
                    .alphabet
                    .parse_jet(ident)
                    .ok_or_else(|| AlgebraError::UnknownGenerator(ident.into()))?;
                Ok(DiffPoly::term(Rational::one(), Mono::var(v)))
            }
            _ => Err(self.error("expected number, jet variable or '('")),
        }
    }
}
