//! Exact differential-polynomial ring over a configurable generator alphabet.

mod alphabet;
mod calculus;
mod mono;
mod poly;
mod text;

pub use alphabet::{Alphabet, GeneratorKind, GeneratorSpec};
pub use calculus::{
    div_monomial, euler, evolve, is_total_derivative, mono_root, monomial_pow, rational_root,
    substitute,
};
pub use mono::{Exponent, Gen, JetVar, Mono};
pub use poly::{rat, DiffPoly};
pub use text::TextDisplay;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("expected a single monomial")]
    NotAMonomial,
    #[error("not an exact power in the ring")]
    NotAPerfectPower,
    #[error("exponent {exponent} not allowed for {generator} at jet order {order}")]
    InvalidExponent {
        generator: String,
        order: u16,
        exponent: String,
    },
    #[error("duplicate generator name {0}")]
    DuplicateGenerator(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("substitution failed: {0}")]
    Substitution(String),
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;

    fn alphabet() -> Alphabet {
        Alphabet::new(vec![
            GeneratorSpec::new("u", GeneratorKind::Radical),
            GeneratorSpec::new("v", GeneratorKind::Plain),
            GeneratorSpec::new("k_m1", GeneratorKind::Invertible),
            GeneratorSpec::new("k0", GeneratorKind::Plain),
        ])
        .unwrap()
    }

    const U: Gen = Gen(0);
    const V: Gen = Gen(1);
    const KM1: Gen = Gen(2);

    fn p(s: &str) -> DiffPoly {
        DiffPoly::parse(s, &alphabet()).unwrap()
    }

    #[test]
    fn diff_x_examples() {
        assert_eq!(p("u").diff_x(), p("u1"));
        assert_eq!(p("u^(1/2)").diff_x(), p("1/2*u^(-1/2)*u1"));
        assert_eq!(p("u1^2").diff_x(), p("2*u1*u2"));
        assert_eq!(p("7").diff_x(), DiffPoly::zero());
    }

    #[test]
    fn euler_examples() {
        assert!(euler(&p("u1"), U).is_zero());
        assert_eq!(euler(&p("1/2*u^2"), U), p("u"));
        assert_eq!(euler(&p("u1^2"), U), p("-2*u2"));
    }

    /// Finite-difference gradient of the discretized functional `∮ u_x^2 dx`,
    /// compared pointwise with the symbolic Euler derivative `-2 u_xx`.
    #[test]
    fn euler_matches_discrete_gradient() {
        let n = 256;
        let h = std::f64::consts::TAU / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let u: Vec<f64> = xs.iter().map(|x| 1.0 + 0.3 * x.sin() + 0.1 * (2.0 * x).cos()).collect();
        let functional = |u: &[f64]| -> f64 {
            (0..n)
                .map(|i| {
                    let d = (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * h);
                    d * d * h
                })
                .sum()
        };
        let grad = euler(&p("u1^2"), U);
        let eps = 1e-6;
        for i in (0..n).step_by(17) {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += eps;
            dn[i] -= eps;
            let fd = (functional(&up) - functional(&dn)) / (2.0 * eps) / h;
            let x = xs[i];
            let uxx = -0.3 * x.sin() - 0.4 * (2.0 * x).cos();
            let sym = grad.eval(|v| match v.order {
                2 => uxx,
                _ => unreachable!(),
            });
            assert!((fd - sym).abs() < 5e-3, "i={i}: fd={fd} sym={sym}");
        }
    }

    #[test]
    fn total_derivative_examples() {
        assert!(is_total_derivative(&p("u1*u2"), U));
        assert!(!is_total_derivative(&p("u1^2"), U));
        assert!(is_total_derivative(&p("-1/4*u1*u^(-1)"), U));
        assert!(!is_total_derivative(&p("u*v1"), U));
        assert!(is_total_derivative(&p("u*v1 + u1*v"), U));
    }

    #[test]
    fn substitution_examples() {
        let a = alphabet();
        let mut b = BTreeMap::new();
        b.insert(U, p("k_m1^2"));
        assert_eq!(substitute(&p("u"), &b, &a).unwrap(), p("k_m1^2"));
        assert_eq!(substitute(&p("u1"), &b, &a).unwrap(), p("2*k_m1*k_m1_1"));
        assert_eq!(substitute(&p("u^(-5/2)*u1"), &b, &a).unwrap(), p("2*k_m1^(-4)*k_m1_1"));
        let q = p("u^(1/2) + v2*u1");
        assert_eq!(substitute(&q, &BTreeMap::new(), &a).unwrap(), q);

        let mut bad = BTreeMap::new();
        bad.insert(KM1, p("v"));
        assert!(matches!(
            substitute(&p("k_m1^(-1)"), &bad, &a),
            Err(AlgebraError::Substitution(_))
        ));
        let mut one = BTreeMap::new();
        one.insert(U, DiffPoly::one());
        assert_eq!(
            substitute(&p("u^(-1/2) + u1*u^(-3/2)"), &one, &a).unwrap(),
            DiffPoly::one()
        );
    }

    #[test]
    fn mono_root_examples() {
        let a = alphabet();
        assert_eq!(mono_root(&p("u"), 2, &a).unwrap(), p("u^(1/2)"));
        assert_eq!(mono_root(&p("4*u^2*u1^2"), 2, &a).unwrap(), p("2*u*u1"));
        assert_eq!(mono_root(&p("u + u1"), 2, &a), Err(AlgebraError::NotAMonomial));
        assert_eq!(mono_root(&p("2*u"), 2, &a), Err(AlgebraError::NotAPerfectPower));
        assert_eq!(mono_root(&p("v"), 2, &a), Err(AlgebraError::NotAPerfectPower));
        assert_eq!(mono_root(&p("u1"), 2, &a), Err(AlgebraError::NotAPerfectPower));
        assert_eq!(mono_root(&p("-8*k_m1^3"), 3, &a).unwrap(), p("-2*k_m1"));
    }

    #[test]
    fn invalid_exponents_rejected() {
        let a = alphabet();
        assert!(DiffPoly::parse("v^(1/2)", &a).is_err());
        assert!(DiffPoly::parse("k_m1^(1/2)", &a).is_err());
        assert!(DiffPoly::parse("u1^(-1)", &a).is_err());
        assert!(DiffPoly::parse("k_m1^(-3)", &a).is_ok());
        assert!(DiffPoly::parse("w", &a).is_err());
    }

    #[test]
    fn text_rendering() {
        let a = alphabet();
        let k1 = p("-5/32*u1^2*u^(-5/2) + 1/8*u2*u^(-3/2)");
        let s = k1.to_text(&a);
        assert_eq!(DiffPoly::parse(&s, &a).unwrap(), k1);
        assert_eq!(p("k0_1 - k_m1_2").to_text(&a), "k0_1 - k_m1_2");
        assert_eq!(p("-u").to_text(&a), "-u");
        let tex = p("-1/4*u1*u^(-1)").to_latex(&a);
        assert_eq!(tex, "-\\frac{1}{4} u^{-1} u_{x}");
    }

    fn arb_poly() -> impl Strategy<Value = DiffPoly> {
        let factor = (0u16..2, 0u16..3, 0i32..3);
        let term = (-4i64..5, 1i64..4, proptest::collection::vec(factor, 0..3));
        proptest::collection::vec(term, 0..4).prop_map(|terms| {
            DiffPoly::from_terms(terms.into_iter().map(|(n, d, fs)| {
                let mono = Mono::from_factors(fs.into_iter().map(|(g, o, e)| {
                    // radical u at order 0 may carry a half exponent
                    let half = if g == 0 && o == 0 { 1 } else { 0 };
                    (JetVar::new(Gen(g), o), Exponent::from_halves(2 * e + half))
                }));
                (rat(n, d), mono)
            }))
        })
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn diff_x_is_a_derivation(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).diff_x();
            let rhs = &(&a.diff_x() * &b) + &(&a * &b.diff_x());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn euler_kills_total_derivatives(a in arb_poly()) {
            let d = a.diff_x();
            prop_assert!(euler(&d, U).is_zero());
            prop_assert!(euler(&d, V).is_zero());
        }

        #[test]
        fn normalization_idempotent(a in arb_poly()) {
            let again = DiffPoly::from_terms(a.terms().map(|(m, c)| (c.clone(), m.clone())));
            prop_assert_eq!(&again, &a);
            let ordered: Vec<_> = a.terms().map(|(m, _)| m.clone()).collect();
            let mut sorted = ordered.clone();
            sorted.sort();
            prop_assert_eq!(ordered, sorted);
        }

        #[test]
        fn text_round_trip(a in arb_poly()) {
            let al = alphabet();
            prop_assert_eq!(DiffPoly::parse(&a.to_text(&al), &al).unwrap(), a);
        }
    }
}
