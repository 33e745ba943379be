use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Index of a generator inside an [`Alphabet`](super::Alphabet).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(pub u16);

/// A jet variable: the `order`-th x-derivative of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub gen: Gen,
    pub order: u16,
}

impl JetVar {
    pub const fn new(gen: Gen, order: u16) -> Self {
        JetVar { gen, order }
    }

    pub const fn base(gen: Gen) -> Self {
        JetVar { gen, order: 0 }
    }

    pub fn shifted(self) -> Self {
        JetVar {
            gen: self.gen,
            order: self.order + 1,
        }
    }
}

/// Exponent with denominator 1 or 2, stored in half-units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(i32);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0);
    pub const ONE: Exponent = Exponent(2);

    pub const fn from_int(n: i32) -> Self {
        Exponent(2 * n)
    }

    pub const fn from_halves(h: i32) -> Self {
        Exponent(h)
    }

    pub const fn halves(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Numerator and denominator of the exponent in lowest terms.
    pub fn ratio(self) -> (i32, i32) {
        if self.is_integer() {
            (self.0 / 2, 1)
        } else {
            (self.0, 2)
        }
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-self.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio() {
            (n, 1) if n >= 0 => write!(f, "{n}"),
            (n, 1) => write!(f, "({n})"),
            (n, d) => write!(f, "({n}/{d})"),
        }
    }
}

pub(crate) type Factors = SmallVec<[(JetVar, Exponent); 4]>;

/// Power product of jet variables, sorted by jet variable with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono {
    factors: Factors,
}

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }

    pub fn var(v: JetVar) -> Self {
        Mono::pow_of(v, Exponent::ONE)
    }

    pub fn pow_of(v: JetVar, e: Exponent) -> Self {
        let mut factors = Factors::new();
        if !e.is_zero() {
            factors.push((v, e));
        }
        Mono { factors }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and dropping zeros.
    pub fn from_factors<I: IntoIterator<Item = (JetVar, Exponent)>>(it: I) -> Self {
        let mut factors: Factors = it.into_iter().collect();
        factors.sort_by_key(|(v, _)| *v);
        let mut out = Factors::new();
        for (v, e) in factors {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le = *le + e,
                _ => out.push((v, e)),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Mono { factors: out }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(JetVar, Exponent)] {
        &self.factors
    }

    pub fn exponent(&self, v: JetVar) -> Exponent {
        self.factors
            .binary_search_by_key(&v, |(w, _)| *w)
            .map(|i| self.factors[i].1)
            .unwrap_or(Exponent::ZERO)
    }

    /// Sum of exponents in half-units.
    pub fn degree_halves(&self) -> i32 {
        self.factors.iter().map(|(_, e)| e.halves()).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Factors::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if !e.is_zero() {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono { factors: out }
    }

    /// Multiplies the exponent of `v` by adding `delta`.
    pub fn with_adjusted(&self, v: JetVar, delta: Exponent) -> Mono {
        self.mul(&Mono::pow_of(v, delta))
    }

    /// Every exponent multiplied by `num/den`; `None` when a result leaves the half-integer lattice.
    pub fn scaled_exponents(&self, num: i32, den: i32) -> Option<Mono> {
        let mut out = Factors::with_capacity(self.factors.len());
        for &(v, e) in &self.factors {
            let h = e.halves() * num;
            if h % den != 0 {
                return None;
            }
            out.push((v, Exponent::from_halves(h / den)));
        }
        Some(Mono { factors: out })
    }

    pub fn inverse(&self) -> Mono {
        Mono {
            factors: self.factors.iter().map(|&(v, e)| (v, -e)).collect(),
        }
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        self.factors.iter().map(|(v, _)| v.gen)
    }
}

// Graded order: total degree first, then lexicographic on the sorted factor list.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree_halves()
            .cmp(&other.degree_halves())
            .then_with(|| self.factors.as_slice().cmp(other.factors.as_slice()))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
