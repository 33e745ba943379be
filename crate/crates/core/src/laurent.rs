//! Truncated Laurent series in the spectral parameter `z` with explicit precision.
//!
//! A series stores degrees `top` down to `low`. Its [`Precision`] says whether
//! degrees below `low` are exactly zero ([`Precision::Exact`]) or unknown
//! ([`Precision::Known`]`(floor)` with `floor == low`). Unknown coefficients can
//! never be read back as zeros: [`LaurentSeries::coeff_at`] fails below the floor.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::algebra::{Alphabet, DiffPoly};

/// Coefficient ring of a Laurent series.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn add_assign(&mut self, other: &Self) {
        *self = Coefficient::add(self, other);
    }

    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self) {
        if !a.is_zero() && !b.is_zero() {
            self.add_assign(&a.mul(b));
        }
    }
}

/// Coefficient rings carrying a total x-derivative.
pub trait Derivation: Coefficient {
    fn diff_x(&self) -> Self;
}

impl Coefficient for DiffPoly {
    fn zero() -> Self {
        DiffPoly::zero()
    }
    fn one() -> Self {
        DiffPoly::one()
    }
    fn is_zero(&self) -> bool {
        DiffPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_ref(other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add_assign(&mut self, other: &Self) {
        self.add_assign_ref(other);
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        if !a.is_zero() && !b.is_zero() {
            self.add_assign_ref(&a.mul_ref(b));
        }
    }
}

impl Derivation for DiffPoly {
    fn diff_x(&self) -> Self {
        DiffPoly::diff_x(self)
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaurentError {
    #[error("empty precision window: floor {floor} above top {top}")]
    EmptyWindow { floor: i32, top: i32 },
    #[error("degree {degree} is below the precision floor {floor}")]
    BelowPrecision { degree: i32, floor: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    /// All coefficients below the stored range are exactly zero.
    Exact,
    /// Coefficients below this degree are unknown.
    Known(i32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<C> {
    top: i32,
    low: i32,
    precision: Precision,
    /// `coeffs[i]` is the coefficient of `z^(top - i)`.
    coeffs: Vec<C>,
}

impl<C: Coefficient> LaurentSeries<C> {
    /// Exact zero series.
    pub fn zero() -> Self {
        LaurentSeries {
            top: 0,
            low: 0,
            precision: Precision::Exact,
            coeffs: vec![C::zero()],
        }
    }

    /// Exact monomial `c z^d`.
    pub fn monomial(c: C, d: i32) -> Self {
        LaurentSeries {
            top: d,
            low: d,
            precision: Precision::Exact,
            coeffs: vec![c],
        }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    /// Series from `(degree, coefficient)` pairs with the given precision.
    ///
    /// For `Known(floor)` the stored window is `[floor, top]`; terms below the
    /// floor are dropped.
    pub fn from_terms<I>(terms: I, top: i32, precision: Precision) -> Result<Self, LaurentError>
    where
        I: IntoIterator<Item = (i32, C)>,
    {
        let terms: Vec<(i32, C)> = terms.into_iter().collect();
        let low = match precision {
            Precision::Known(f) => {
                if f > top {
                    return Err(LaurentError::EmptyWindow { floor: f, top });
                }
                f
            }
            Precision::Exact => terms.iter().map(|(d, _)| *d).min().unwrap_or(top).min(top),
        };
        let mut s = LaurentSeries {
            top,
            low,
            precision,
            coeffs: vec![C::zero(); (top - low + 1) as usize],
        };
        for (d, c) in terms {
            assert!(d <= top, "term of degree {d} above declared top {top}");
            if d >= low {
                s.coeffs[(top - d) as usize].add_assign(&c);
            }
        }
        Ok(s)
    }

    pub fn top(&self) -> i32 {
        self.top
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Lowest known degree, `None` when exact.
    pub fn floor(&self) -> Option<i32> {
        match self.precision {
            Precision::Exact => None,
            Precision::Known(f) => Some(f),
        }
    }

    /// Lowest stored degree.
    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    pub fn coeff_at(&self, d: i32) -> Result<C, LaurentError> {
        if d > self.top {
            return Ok(C::zero());
        }
        if d < self.low {
            return match self.precision {
                Precision::Exact => Ok(C::zero()),
                Precision::Known(f) => Err(LaurentError::BelowPrecision { degree: d, floor: f }),
            };
        }
        Ok(self.coeffs[(self.top - d) as usize].clone())
    }

    /// Borrowing accessor for degrees in the stored range.
    pub fn get(&self, d: i32) -> Option<&C> {
        if d > self.top || d < self.low {
            None
        } else {
            Some(&self.coeffs[(self.top - d) as usize])
        }
    }

    pub fn is_known(&self, d: i32) -> bool {
        match self.precision {
            Precision::Exact => true,
            Precision::Known(f) => d >= f,
        }
    }

    /// Nonzero stored terms, highest degree first.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        let top = self.top;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (top - i as i32, c))
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn leading_degree(&self) -> Option<i32> {
        self.terms().next().map(|(d, _)| d)
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn map<D: Coefficient, F: FnMut(&C) -> D>(&self, mut f: F) -> LaurentSeries<D> {
        LaurentSeries {
            top: self.top,
            low: self.low,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(&mut f).collect(),
        }
    }

    pub fn try_map<D: Coefficient, E, F: FnMut(&C) -> Result<D, E>>(
        &self,
        mut f: F,
    ) -> Result<LaurentSeries<D>, E> {
        Ok(LaurentSeries {
            top: self.top,
            low: self.low,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(&mut f).collect::<Result<_, _>>()?,
        })
    }

    /// Stored range widened to `[low, top]`, padding with zeros.
    fn widened(&self, top: i32, low: i32) -> Vec<C> {
        (low..=top).rev().map(|d| self.get(d).cloned().unwrap_or_else(C::zero)).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.combine(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.combine(other, |a, b| a.sub(b))
    }

    fn combine<F: Fn(&C, &C) -> C>(&self, other: &Self, f: F) -> Result<Self, LaurentError> {
        let top = self.top.max(other.top);
        let precision = match (self.precision, other.precision) {
            (Precision::Exact, Precision::Exact) => Precision::Exact,
            (Precision::Known(a), Precision::Exact) | (Precision::Exact, Precision::Known(a)) => {
                Precision::Known(a)
            }
            (Precision::Known(a), Precision::Known(b)) => Precision::Known(a.max(b)),
        };
        let low = match precision {
            Precision::Known(f) => {
                if f > top {
                    return Err(LaurentError::EmptyWindow { floor: f, top });
                }
                f
            }
            Precision::Exact => self.low.min(other.low),
        };
        let a = self.widened(top, low);
        let b = other.widened(top, low);
        Ok(LaurentSeries {
            top,
            low,
            precision,
            coeffs: a.iter().zip(&b).map(|(x, y)| f(x, y)).collect(),
        })
    }

    /// Product with the precision contamination rule
    /// `floor = max(floor_a + top_b, floor_b + top_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self, LaurentError> {
        let top = self.top + other.top;
        let from_a = self.floor().map(|f| f + other.top);
        let from_b = other.floor().map(|f| f + self.top);
        let precision = match (from_a, from_b) {
            (None, None) => Precision::Exact,
            (Some(x), None) | (None, Some(x)) => Precision::Known(x),
            (Some(x), Some(y)) => Precision::Known(x.max(y)),
        };
        let low = match precision {
            Precision::Known(f) => {
                if f > top {
                    return Err(LaurentError::EmptyWindow { floor: f, top });
                }
                f
            }
            Precision::Exact => self.low + other.low,
        };
        let mut coeffs = vec![C::zero(); (top - low + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let da = self.top - i as i32;
            for (j, b) in other.coeffs.iter().enumerate() {
                let d = da + other.top - j as i32;
                if d < low {
                    break;
                }
                coeffs[(top - d) as usize].add_product(a, b);
            }
        }
        Ok(LaurentSeries {
            top,
            low,
            precision,
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|a| a.mul(c))
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentSeries {
            top: self.top + k,
            low: self.low + k,
            precision: match self.precision {
                Precision::Exact => Precision::Exact,
                Precision::Known(f) => Precision::Known(f + k),
            },
            coeffs: self.coeffs.clone(),
        }
    }

    /// Non-negative part `sum_{d >= 0} a_d z^d`, exact below degree 0.
    pub fn project_plus(&self) -> Result<Self, LaurentError> {
        if let Precision::Known(f) = self.precision {
            if f > 0 {
                return Err(LaurentError::BelowPrecision { degree: 0, floor: f });
            }
        }
        if self.top < 0 {
            return Ok(Self::zero());
        }
        let terms = (0..=self.top).map(|d| (d, self.get(d).cloned().unwrap_or_else(C::zero)));
        Self::from_terms(terms, self.top, Precision::Exact)
    }

    /// Raises the floor to `floor`, discarding lower coefficients.
    pub fn truncate(&self, floor: i32) -> Result<Self, LaurentError> {
        if floor > self.top {
            return Err(LaurentError::EmptyWindow { floor, top: self.top });
        }
        if let Precision::Known(f) = self.precision {
            if floor < f {
                return Err(LaurentError::BelowPrecision { degree: floor, floor: f });
            }
        }
        let terms = (floor..=self.top).map(|d| (d, self.coeff_at(d).expect("in window")));
        Self::from_terms(terms, self.top, Precision::Known(floor))
    }

    /// Restriction to degrees `<= max_degree`, precision kept.
    pub fn restrict_top(&self, max_degree: i32) -> Result<Self, LaurentError> {
        let floor = self.floor();
        if let Some(f) = floor {
            if f > max_degree {
                return Err(LaurentError::EmptyWindow { floor: f, top: max_degree });
            }
        }
        let low = self.low.min(max_degree);
        let terms = (low..=max_degree.min(self.top))
            .map(|d| (d, self.get(d).cloned().unwrap_or_else(C::zero)));
        Self::from_terms(terms, max_degree, self.precision)
    }

    /// True when no odd degree carries a nonzero coefficient (a series in `λ = z²`).
    pub fn is_even(&self) -> bool {
        self.terms().all(|(d, _)| d % 2 == 0)
    }

    /// Degrees in the common known window of `self` and `other` where they differ.
    pub fn mismatches(&self, other: &Self) -> Vec<i32> {
        let top = self.top.max(other.top);
        let floor = [self.floor(), other.floor()].into_iter().flatten().max();
        let low = floor.unwrap_or_else(|| self.low.min(other.low));
        (low..=top)
            .rev()
            .filter(|&d| self.coeff_at(d).ok() != other.coeff_at(d).ok())
            .collect()
    }

    /// Equality on the common known window.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.mismatches(other).is_empty()
    }
}

impl<C: Derivation> LaurentSeries<C> {
    /// Coefficient-wise x-derivative; window unchanged.
    pub fn diff_x(&self) -> Self {
        self.map(|c| c.diff_x())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub deg: i32,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub var: String,
    pub top: i32,
    pub floor: i32,
    #[serde(default)]
    pub exact: bool,
    pub terms: Vec<SeriesTermJson>,
}

#[derive(Debug, thiserror::Error)]
pub enum SeriesParseError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

impl LaurentSeries<DiffPoly> {
    pub fn to_json_value(&self, alphabet: &Alphabet) -> SeriesJson {
        SeriesJson {
            var: "z".into(),
            top: self.top,
            floor: self.floor().unwrap_or(self.low),
            exact: self.is_exact(),
            terms: self
                .terms()
                .map(|(deg, c)| SeriesTermJson {
                    deg,
                    coeff: c.to_text(alphabet),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> String {
        serde_json::to_string(&self.to_json_value(alphabet)).expect("serializable")
    }

    pub fn from_json_value(v: &SeriesJson, alphabet: &Alphabet) -> Result<Self, SeriesParseError> {
        let terms = v
            .terms
            .iter()
            .map(|t| Ok((t.deg, DiffPoly::parse(&t.coeff, alphabet)?)))
            .collect::<Result<Vec<_>, SeriesParseError>>()?;
        let precision = if v.exact {
            Precision::Exact
        } else {
            Precision::Known(v.floor)
        };
        let mut s = Self::from_terms(terms, v.top, precision)?;
        if v.exact && v.floor < s.low {
            s = Self::from_terms(
                (v.floor..=v.top).map(|d| (d, s.coeff_at(d).expect("exact"))),
                v.top,
                Precision::Exact,
            )?;
        }
        Ok(s)
    }

    pub fn from_json(src: &str, alphabet: &Alphabet) -> Result<Self, SeriesParseError> {
        let v: SeriesJson = serde_json::from_str(src)?;
        Self::from_json_value(&v, alphabet)
    }

    /// Human-readable rendering in the expression grammar, highest degree first.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(d, c)| {
                let body = c.to_text(alphabet);
                let body = if c.len() > 1 { format!("({body})") } else { body };
                let unit = d != 0 && body == "1";
                match d {
                    0 => body,
                    1 if unit => "z".into(),
                    d if unit && d > 0 => format!("z^{d}"),
                    d if unit => format!("z^({d})"),
                    1 => format!("{body}*z"),
                    d if d > 0 => format!("{body}*z^{d}"),
                    d => format!("{body}*z^({d})"),
                }
            })
            .collect();
        if parts.is_empty() {
            parts.push("0".into());
        }
        let mut s = parts.join(" + ");
        if let Some(f) = self.floor() {
            s.push_str(&format!(" + O(z^({}))", f - 1));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::algebra::{rat, GeneratorKind, GeneratorSpec};

    fn exact(terms: &[(i32, f64)]) -> LaurentSeries<f64> {
        let top = terms.iter().map(|t| t.0).max().unwrap();
        LaurentSeries::from_terms(terms.iter().copied(), top, Precision::Exact).unwrap()
    }

    fn known(terms: &[(i32, f64)], top: i32, floor: i32) -> LaurentSeries<f64> {
        LaurentSeries::from_terms(terms.iter().copied(), top, Precision::Known(floor)).unwrap()
    }

    #[test]
    fn product_of_exact_series() {
        let a = exact(&[(1, 1.0), (0, 1.0)]);
        let b = exact(&[(1, 1.0), (0, -1.0)]);
        let p = a.mul(&b).unwrap();
        assert!(p.is_exact());
        assert!(p.agrees_with(&exact(&[(2, 1.0), (0, -1.0)])));
    }

    #[test]
    fn precision_contamination_rule() {
        let a = known(&[(1, 1.0), (0, 2.0)], 1, 0);
        let b = known(&[(2, 1.0), (1, 3.0), (0, 1.0)], 2, 0);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.top(), 3);
        assert_eq!(p.floor(), Some(2));
        assert_eq!(p.coeff_at(3).unwrap(), 1.0);
        assert_eq!(p.coeff_at(2).unwrap(), 5.0);
        assert!(p.coeff_at(1).is_err());
    }

    #[test]
    fn empty_window_is_an_error() {
        let a = known(&[(0, 1.0)], 0, 0);
        let b = known(&[(0, 1.0)], 0, -1);
        assert!(a.mul(&b).is_ok());
        let c = known(&[(0, 1.0)], 0, 0);
        let d = known(&[(-3, 1.0)], -3, -3);
        assert!(c.mul(&d).is_ok());
        let s = known(&[(2, 1.0)], 2, 2);
        let t = known(&[(2, 1.0)], 2, 1);
        // floor max(2+2, 1+2) = 4 <= top 4
        assert_eq!(s.mul(&t).unwrap().floor(), Some(4));
        assert!(matches!(
            LaurentSeries::<f64>::from_terms(vec![], 0, Precision::Known(1)),
            Err(LaurentError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let a = known(&[(2, 1.0), (-1, 4.0)], 2, -3);
        let p = a.project_plus().unwrap();
        assert!(p.agrees_with(&exact(&[(2, 1.0)])));
        assert_eq!(p.coeff_at(-7).unwrap(), 0.0);
        assert!(exact(&[(-3, 1.0)]).project_plus().unwrap().is_zero());
        assert!(known(&[(3, 1.0)], 3, 1).project_plus().is_err());
    }

    #[test]
    fn even_projection_shape() {
        // (z^(2j-2) w)_+ = sum_{k<j} w_k z^(2(j-k-1)) for an even w
        let w = known(&[(0, 1.0), (-2, 2.0), (-4, 3.0), (-6, 4.0)], 0, -8);
        assert!(w.is_even());
        let j = 3;
        let p = w.shift(2 * j - 2).project_plus().unwrap();
        let expect = exact(&[(4, 1.0), (2, 2.0), (0, 3.0)]);
        assert!(p.agrees_with(&expect));
    }

    #[test]
    fn coeff_at_examples() {
        let a = exact(&[(2, 1.0), (0, 3.0)]);
        assert_eq!(a.coeff_at(0).unwrap(), 3.0);
        let b = known(&[(2, 1.0)], 2, -5);
        assert_eq!(b.coeff_at(-1).unwrap(), 0.0);
        let c = known(&[(0, 1.0)], 0, -2);
        assert_eq!(
            c.coeff_at(-3),
            Err(LaurentError::BelowPrecision { degree: -3, floor: -2 })
        );
    }

    #[test]
    fn diff_x_and_json() {
        let al = Alphabet::new(vec![GeneratorSpec::new("u", GeneratorKind::Radical)]).unwrap();
        let u = DiffPoly::parse("u", &al).unwrap();
        let s = LaurentSeries::from_terms(
            vec![(1, u.clone()), (-1, DiffPoly::parse("u^(-1/2)*u1", &al).unwrap())],
            1,
            Precision::Known(-3),
        )
        .unwrap();
        let d = s.diff_x();
        assert_eq!(d.coeff_at(1).unwrap(), DiffPoly::parse("u1", &al).unwrap());
        assert_eq!(d.floor(), Some(-3));
        let c = LaurentSeries::constant(DiffPoly::constant(rat(3, 4)));
        assert!(c.diff_x().is_zero());

        let js = s.to_json(&al);
        assert!(js.starts_with("{\"var\":\"z\",\"top\":1,\"floor\":-3"));
        let back = LaurentSeries::from_json(&js, &al).unwrap();
        assert_eq!(back, s);
    }

    fn arb_series() -> impl Strategy<Value = LaurentSeries<f64>> {
        (-2i32..3, 0i32..5, proptest::collection::vec(-3i32..4, 8)).prop_map(|(top, len, cs)| {
            let terms: Vec<(i32, f64)> =
                (0..=len).map(|i| (top - i, f64::from(cs[i as usize]))).collect();
            LaurentSeries::from_terms(terms, top, Precision::Exact).unwrap()
        })
    }

    proptest! {
        #[test]
        fn truncated_products_agree_with_exact(a in arb_series(), b in arb_series(), fa in 0i32..4, fb in 0i32..4) {
            let ta = a.truncate(a.top() - fa).unwrap();
            let tb = b.truncate(b.top() - fb).unwrap();
            let full = a.mul(&b).unwrap();
            let trunc = ta.mul(&tb).unwrap();
            prop_assert!(full.agrees_with(&trunc));
            prop_assert_eq!(trunc.floor(), Some((a.top() - fa + b.top()).max(b.top() - fb + a.top())));
        }

        #[test]
        fn plus_minus_split(a in arb_series()) {
            let plus = a.project_plus().unwrap();
            let minus = a.sub(&plus).unwrap();
            prop_assert!(plus.add(&minus).unwrap().agrees_with(&a));
            prop_assert!(plus.terms().all(|(d, _)| d >= 0));
            prop_assert!(minus.terms().all(|(d, _)| d < 0));
        }

        #[test]
        fn product_commutes_and_associates(a in arb_series(), b in arb_series(), c in arb_series()) {
            let ta = a.truncate(a.top() - 2).unwrap();
            prop_assert!(ta.mul(&b).unwrap().agrees_with(&b.mul(&ta).unwrap()));
            let l = ta.mul(&b).unwrap().mul(&c).unwrap();
            let r = ta.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(l.agrees_with(&r));
            prop_assert_eq!(l.floor(), r.floor());
        }
    }
}
