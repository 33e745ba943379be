use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mono::{Exponent, Gen, JetVar, Mono};
use super::Rational;

/// Exact-rational polynomial in jet variables, kept in canonical form:
/// like terms merged, zero coefficients dropped, terms ordered by [`Mono`]'s graded order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Mono, Rational>,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        DiffPoly::term(c, Mono::one())
    }

    pub fn int(n: i64) -> Self {
        DiffPoly::constant(rat(n, 1))
    }

    pub fn term(c: Rational, m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    pub fn var(v: JetVar) -> Self {
        DiffPoly::term(Rational::one(), Mono::var(v))
    }

    pub fn gen(g: Gen) -> Self {
        DiffPoly::var(JetVar::base(g))
    }

    /// `g^e` for an arbitrary half-integer exponent (no alphabet check).
    pub fn gen_pow(g: Gen, e: Exponent) -> Self {
        DiffPoly::term(Rational::one(), Mono::pow_of(JetVar::base(g), e))
    }

    pub fn from_terms<I: IntoIterator<Item = (Rational, Mono)>>(it: I) -> Self {
        let mut p = DiffPoly::zero();
        for (c, m) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn as_monomial(&self) -> Option<(&Rational, &Mono)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (c, m))
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .get(&Mono::one())
                .cloned(),
            _ => None,
        }
    }

    pub fn coefficient(&self, m: &Mono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &DiffPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub_assign_ref(&mut self, other: &DiffPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_term(&self, c: &Rational, m: &Mono) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        let mut out = DiffPoly::zero();
        for (n, a) in &self.terms {
            out.add_term(n.mul(m), a * c);
        }
        out
    }

    pub fn mul_ref(&self, other: &DiffPoly) -> DiffPoly {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = DiffPoly::zero();
        for (m, c) in &small.terms {
            for (n, d) in &large.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        let mut acc = DiffPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    /// Total x-derivative: Leibniz rule with jet shift `(g, n) -> (g, n + 1)`.
    pub fn diff_x(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for &(v, e) in m.factors() {
                let coeff = c * Rational::new(e.halves().into(), 2.into());
                let dm = m
                    .with_adjusted(v, -Exponent::ONE)
                    .with_adjusted(v.shifted(), Exponent::ONE);
                out.add_term(dm, coeff);
            }
        }
        out
    }

    pub fn diff_x_n(&self, n: usize) -> DiffPoly {
        (0..n).fold(self.clone(), |p, _| p.diff_x())
    }

    /// Partial derivative with respect to a single jet variable.
    pub fn partial(&self, v: JetVar) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e.is_zero() {
                continue;
            }
            let coeff = c * Rational::new(e.halves().into(), 2.into());
            out.add_term(m.with_adjusted(v, -Exponent::ONE), coeff);
        }
        out
    }

    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(v, _)| *v))
            .collect()
    }

    pub fn generators(&self) -> BTreeSet<Gen> {
        self.terms.keys().flat_map(|m| m.gens()).collect()
    }

    pub fn max_order(&self, g: Gen) -> Option<u16> {
        self.jet_vars()
            .into_iter()
            .filter(|v| v.gen == g)
            .map(|v| v.order)
            .max()
    }

    /// Largest absolute value among numerators and denominators, in bits.
    pub fn height_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Evaluates with floating-point jet values.
    pub fn eval<F: FnMut(JetVar) -> f64>(&self, mut jet: F) -> f64 {
        let mut cache: BTreeMap<JetVar, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for &(v, e) in m.factors() {
                let x = *cache.entry(v).or_insert_with(|| jet(v));
                t *= if e.is_integer() {
                    x.powi(e.halves() / 2)
                } else {
                    x.powf(e.to_f64())
                };
            }
            total += t;
        }
        total
    }

    /// Leading coefficient sign is positive (used for branch selection).
    pub fn leading_is_positive(&self) -> bool {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.is_positive())
            .unwrap_or(false)
    }
}

impl Add<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Mul<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.mul_ref(rhs)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self.sub_assign_ref(&rhs);
        self
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        self.mul_ref(&rhs)
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}
