//! Bi-Hamiltonian structure of the Harry Dym hierarchy.
//!
//! Everything lives in the `u`-ring of the HD alphabet: the Riccati series
//! `k(z)` solving `k_x + k^2 = u z^2`, the pencil Casimir `w(λ)` (stored as an
//! even series in `z`, `λ = z^2`), the Poisson tensors
//! `P0 = -1/2 ∂³`, `P1 = -2u∂ - u_x` with pencil `P_λ = P0 - λ P1`, and the
//! Lenard ladder `P1 w_0 = 0`, `P0 w_j = P1 w_{j+1}`.

use num_traits::Zero;

use crate::algebra::{euler, rat, AlgebraError, DiffPoly, Exponent, Rational};
use crate::laurent::{LaurentError, LaurentSeries, Precision};
use crate::rings::{u, U, V};

pub type Series = LaurentSeries<DiffPoly>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HdError {
    #[error("Lenard chain broken at order {order}")]
    LenardChainBroken { order: usize },
    #[error("vector fields are not proportional")]
    NotProportional,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

fn u_pow(halves: i32) -> DiffPoly {
    DiffPoly::gen_pow(U, Exponent::from_halves(halves))
}

/// `k = k_{-1} z + sum_{j=0}^{order} k_j z^{-j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    pub k: Series,
    pub order: usize,
}

impl RiccatiSolution {
    /// Coefficient `k_j` (`j >= -1`).
    pub fn coefficient(&self, j: i32) -> DiffPoly {
        self.k.coeff_at(-j).expect("coefficient within the computed order")
    }
}

/// Triangular solve of `k_x + k^2 = u z^2` down to `k_order`.
///
/// Row `z^d` (d <= 1) reads `k_{-d,x}... + 2 k_{-1} k_{1-d} + ... = 0`, so
/// each new coefficient is divided by `2 k_{-1} = 2 u^(1/2)`.
pub fn solve_riccati_hd(order: usize) -> RiccatiSolution {
    let n = order as i32;
    // c[i] is the coefficient of z^(1 - i)
    let mut c: Vec<DiffPoly> = vec![u_pow(1)];
    let inv_pivot = rat(1, 2);
    let inv_pivot_mono = u_pow(-1);
    let (_, inv_mono) = inv_pivot_mono.as_monomial().expect("monomial");
    let inv_mono = inv_mono.clone();
    for i in 1..=(n + 1) as usize {
        // row of degree d = 2 - i determines c[i]
        let mut rhs = c[i - 1].diff_x();
        for a in 1..i {
            let b = i - a;
            if b >= 1 && b < i {
                rhs.add_assign_ref(&c[a].mul_ref(&c[b]));
            }
        }
        c.push(rhs.mul_term(&-inv_pivot.clone(), &inv_mono));
    }
    let k = Series::from_terms(
        c.into_iter().enumerate().map(|(i, p)| (1 - i as i32, p)),
        1,
        Precision::Known(-n),
    )
    .expect("valid window");
    RiccatiSolution { k, order }
}

/// `k_x + k^2 - u z^2`, zero on its known window for a Riccati solution.
pub fn riccati_residual(k: &Series, field: &DiffPoly) -> Result<Series, LaurentError> {
    let kk = k.mul(k)?;
    kk.add(&k.diff_x())?.sub(&Series::monomial(field.clone(), 2))
}

/// `w = sum_{i>=0} w_i λ^{-i}` as an even `z`-series with top degree 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirSeries {
    pub w: Series,
    pub order: usize,
}

impl CasimirSeries {
    pub fn coefficient(&self, i: usize) -> DiffPoly {
        self.w
            .coeff_at(-2 * i as i32)
            .expect("coefficient within the computed order")
    }
}

/// Order-by-order solution of `1/4 w_x^2 - 1/2 w w_xx + λ u w^2 = λ`.
pub fn solve_casimir_w(order: usize) -> CasimirSeries {
    let mut w: Vec<DiffPoly> = vec![u_pow(-1)];
    let mut wx: Vec<DiffPoly> = vec![w[0].diff_x()];
    let mut wxx: Vec<DiffPoly> = vec![wx[0].diff_x()];
    // pivot 2 u w_0 = 2 u^(1/2)
    let pivot = u_pow(-1);
    let (_, pivot_inv) = pivot.as_monomial().expect("monomial");
    let pivot_inv = pivot_inv.clone();
    for m in 1..=order {
        let mut acc = DiffPoly::zero();
        for a in 0..m {
            let b = m - 1 - a;
            acc.add_assign_ref(&wx[a].mul_ref(&wx[b]).scale(&rat(1, 4)));
            acc.sub_assign_ref(&w[a].mul_ref(&wxx[b]).scale(&rat(1, 2)));
        }
        let mut quad = DiffPoly::zero();
        for a in 1..m {
            quad.add_assign_ref(&w[a].mul_ref(&w[m - a]));
        }
        acc.add_assign_ref(&u().mul_ref(&quad));
        let next = acc.mul_term(&rat(-1, 2), &pivot_inv);
        wx.push(next.diff_x());
        wxx.push(wx[m].diff_x());
        w.push(next);
    }
    let n = order as i32;
    let series = Series::from_terms(
        w.into_iter().enumerate().map(|(i, p)| (-2 * i as i32, p)),
        0,
        Precision::Known(-2 * n),
    )
    .expect("valid window");
    CasimirSeries { w: series, order }
}

/// Residual of `1/4 w_x^2 - 1/2 w w_xx + λ u w^2 - λ` on its known window.
pub fn casimir_equation_residual(w: &Series) -> Result<Series, LaurentError> {
    let wx = w.diff_x();
    let wxx = wx.diff_x();
    let q = rat(1, 4);
    let h = rat(1, 2);
    let a = wx.mul(&wx)?.map(|c| c.scale(&q));
    let b = w.mul(&wxx)?.map(|c| c.scale(&h));
    let c = w.mul(w)?.shift(2).map(|c| c.mul_ref(&u()));
    a.sub(&b)?.add(&c)?.sub(&Series::monomial(DiffPoly::one(), 2))
}

/// `P0 v = -1/2 v_xxx`
pub fn apply_p0(v: &DiffPoly) -> DiffPoly {
    v.diff_x_n(3).scale(&rat(-1, 2))
}

/// `P1 v = -2 u v_x - u_x v`
pub fn apply_p1(v: &DiffPoly) -> DiffPoly {
    let uu = u();
    let mut out = uu.mul_ref(&v.diff_x()).scale(&rat(-2, 1));
    out.sub_assign_ref(&uu.diff_x().mul_ref(v));
    out
}

/// `P_λ v = P0 v - λ P1 v` for a series `v` in `z` with `λ = z^2`.
pub fn apply_pencil(v: &Series) -> Result<Series, LaurentError> {
    let p0 = v.map(apply_p0);
    let p1 = v.map(apply_p1).shift(2);
    p0.sub(&p1)
}

/// `P_λ w(λ)`; every known coefficient vanishes for the Casimir series.
pub fn casimir_residual(order: usize) -> Result<Series, LaurentError> {
    apply_pencil(&solve_casimir_w(order).w)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianLadder {
    /// `densities[j] = 2 k_{2j-1}`, the density of `K_{2j}`.
    pub densities: Vec<DiffPoly>,
    /// `gradients[j] = w_j`.
    pub gradients: Vec<DiffPoly>,
    /// `fields[j] = P0 w_j`, with `fields[0]` the HD vector field.
    pub fields: Vec<DiffPoly>,
}

/// Builds the ladder `w_0..w_order` and checks `P1 w_0 = 0`, `P0 w_j = P1 w_{j+1}`,
/// and that each `w_j` is the Euler derivative of its density.
pub fn lenard_ladder(order: usize) -> Result<HamiltonianLadder, HdError> {
    let riccati = solve_riccati_hd(2 * order + 1);
    let casimir = solve_casimir_w(order + 1);
    let mut ladder = HamiltonianLadder {
        densities: Vec::new(),
        gradients: Vec::new(),
        fields: Vec::new(),
    };
    if !apply_p1(&casimir.coefficient(0)).is_zero() {
        return Err(HdError::LenardChainBroken { order: 0 });
    }
    for j in 0..=order {
        let density = riccati.coefficient(2 * j as i32 - 1).scale(&rat(2, 1));
        let grad = casimir.coefficient(j);
        if euler(&density, U) != grad {
            return Err(HdError::LenardChainBroken { order: j });
        }
        let field = apply_p0(&grad);
        if field != apply_p1(&casimir.coefficient(j + 1)) {
            return Err(HdError::LenardChainBroken { order: j });
        }
        ladder.densities.push(density);
        ladder.gradients.push(grad);
        ladder.fields.push(field);
    }
    Ok(ladder)
}

/// The HD vector field `X_0 = P0 w_0 = -1/2 (u^(-1/2))_xxx`.
pub fn hd_vector_field() -> DiffPoly {
    apply_p0(&u_pow(-1))
}

/// `(∂ + 2k)(1/2 ∂)(-∂ + 2k) v` for a series `v`.
pub fn factorization_lhs(k: &Series, v: &Series) -> Result<Series, LaurentError> {
    let two_k = k.map(|c| c.scale(&rat(2, 1)));
    let a = two_k.mul(v)?.sub(&v.diff_x())?;
    let b = a.diff_x().map(|c| c.scale(&rat(1, 2)));
    b.diff_x().add(&two_k.mul(&b)?)
}

/// `-1/2 v_xxx + z^2 (2 u v_x + u_x v)`
pub fn factorization_rhs(v: &Series) -> Result<Series, LaurentError> {
    apply_pencil(v)
}

/// Checks the operator identity on the indeterminate `v` with the Riccati `k` of the given order.
pub fn factorization_check(order: usize) -> Result<bool, HdError> {
    let k = solve_riccati_hd(order).k;
    let v = Series::constant(DiffPoly::gen(V));
    let lhs = factorization_lhs(&k, &v)?;
    let rhs = factorization_rhs(&v)?;
    Ok(lhs.agrees_with(&rhs))
}

/// Exact ratio `c` with `a = c b`, if one exists.
pub fn proportionality(a: &DiffPoly, b: &DiffPoly) -> Option<Rational> {
    let (m, cb) = b.terms().next_back()?;
    let ca = a.coefficient(m);
    let c = ca / cb;
    (b.scale(&c) == *a).then_some(c)
}

/// Ratio of `X_0|_{u=1+q}` to the classical right-hand side `2 ((1+q)^(-1/2))_xxx`.
///
/// With `u = 1 + q` the jets of `q` and `u` coincide beyond order zero and
/// `(1+q)^(-1/2) = u^(-1/2)`, so the comparison happens in the `u`-ring.
pub fn hd_classical_match() -> Result<Rational, HdError> {
    let classical = u_pow(-1).diff_x_n(3).scale(&rat(2, 1));
    let c = proportionality(&hd_vector_field(), &classical).ok_or(HdError::NotProportional)?;
    if c.is_zero() {
        return Err(HdError::NotProportional);
    }
    Ok(c)
}

/// Ratio `c'` with `ρ_t = c' ρ^3 ρ_xxx` for `ρ = -u^(-1/2)` evolving under `X_0`.
pub fn rho_form_constant() -> Result<Rational, HdError> {
    let rho = -u_pow(-1);
    // ρ_t = dρ/du · u_t
    let rho_t = u_pow(-3).scale(&rat(1, 2)).mul_ref(&hd_vector_field());
    let rhs = rho.pow(3).mul_ref(&rho.diff_x_n(3));
    proportionality(&rho_t, &rhs).ok_or(HdError::NotProportional)
}

/// Solution `h = z + sum_{j>=1} h_j z^{-j}` of `h_x + h^2 = u + z^2`, down to `h_order`.
pub fn solve_riccati_kdv(order: usize) -> Series {
    // c[i] is the coefficient of z^(1 - i)
    let mut c: Vec<DiffPoly> = vec![DiffPoly::one(), DiffPoly::zero()];
    for i in 2..=order + 1 {
        // row of degree d = 2 - i: c_{d,x} + 2 c_{d-1} + sum_{a+b=d, a,b<=0} c_a c_b = u δ_{d,0}
        let d = 2 - i as i32;
        let mut rhs = if d == 0 { u() } else { DiffPoly::zero() };
        rhs.sub_assign_ref(&c[i - 1].diff_x());
        for a in 1..i {
            let b = i - a;
            if a >= 1 && b >= 1 {
                rhs.sub_assign_ref(&c[a].mul_ref(&c[b]));
            }
        }
        c.push(rhs.scale(&rat(1, 2)));
    }
    Series::from_terms(
        c.into_iter().enumerate().map(|(i, p)| (1 - i as i32, p)),
        1,
        Precision::Known(-(order as i32)),
    )
    .expect("valid window")
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::algebra::{is_total_derivative, substitute};
    use crate::rings::hd_alphabet;

    fn p(s: &str) -> DiffPoly {
        DiffPoly::parse(s, hd_alphabet()).unwrap()
    }

    fn at_one(x: &DiffPoly) -> DiffPoly {
        let mut b = BTreeMap::new();
        b.insert(U, DiffPoly::one());
        substitute(x, &b, hd_alphabet()).unwrap()
    }

    #[test]
    fn riccati_first_coefficients() {
        let k = solve_riccati_hd(4);
        assert_eq!(k.coefficient(-1), p("u^(1/2)"));
        assert_eq!(k.coefficient(0), p("-1/4*u1*u^(-1)"));
        assert_eq!(k.coefficient(1), p("-5/32*u1^2*u^(-5/2) + 1/8*u2*u^(-3/2)"));
    }

    #[test]
    fn riccati_k2_from_row_z_minus_1() {
        let k = solve_riccati_hd(3);
        let k0 = p("-1/4*u1*u^(-1)");
        let k1 = p("-5/32*u1^2*u^(-5/2) + 1/8*u2*u^(-3/2)");
        let num = &k1.diff_x() + &(&k0 * &k1).scale(&rat(2, 1));
        let expected = num.mul_term(&rat(-1, 2), p("u^(-1/2)").as_monomial().unwrap().1);
        assert_eq!(k.coefficient(2), expected);
    }

    #[test]
    fn riccati_residual_vanishes() {
        for n in 0..=12 {
            let k = solve_riccati_hd(n);
            let r = riccati_residual(&k.k, &u()).unwrap();
            assert!(r.is_zero(), "order {n}");
            assert_eq!(r.floor(), Some(1 - n as i32));
        }
    }

    #[test]
    fn riccati_at_unit_field() {
        let k = solve_riccati_hd(6);
        assert_eq!(at_one(&k.coefficient(-1)), DiffPoly::one());
        for j in 0..=6 {
            assert!(at_one(&k.coefficient(j)).is_zero());
        }
    }

    #[test]
    fn even_coefficients_are_total_derivatives() {
        let k = solve_riccati_hd(10);
        for j in 0..=5 {
            assert!(is_total_derivative(&k.coefficient(2 * j), U), "k_{}", 2 * j);
        }
        assert!(!is_total_derivative(&k.coefficient(1), U));
    }

    #[test]
    fn casimir_first_coefficients() {
        let w = solve_casimir_w(3);
        assert_eq!(w.coefficient(0), p("u^(-1/2)"));
        assert_eq!(w.coefficient(1), p("5/32*u1^2*u^(-7/2) - 1/8*u2*u^(-5/2)"));
        assert!(w.w.is_even());
        let k = solve_riccati_hd(3);
        assert_eq!(euler(&k.coefficient(1).scale(&rat(2, 1)), U), w.coefficient(1));
        for i in 0..=3 {
            let wi = at_one(&w.coefficient(i));
            assert_eq!(wi, if i == 0 { DiffPoly::one() } else { DiffPoly::zero() });
        }
    }

    #[test]
    fn casimir_equation_and_riccati_link() {
        let w = solve_casimir_w(5);
        assert!(casimir_equation_residual(&w.w).unwrap().is_zero());
        // -1/2 w_x + k w = z
        let k = solve_riccati_hd(10).k;
        let lhs = k.mul(&w.w).unwrap().sub(&w.w.diff_x().map(|c| c.scale(&rat(1, 2)))).unwrap();
        let z = Series::monomial(DiffPoly::one(), 1);
        assert!(lhs.agrees_with(&z));
        assert!(lhs.floor().unwrap() <= -8);
    }

    #[test]
    fn pencil_examples() {
        assert_eq!(apply_p0(&p("u^(-1/2)")), p("u^(-1/2)").diff_x_n(3).scale(&rat(-1, 2)));
        assert!(apply_p1(&p("u^(-1/2)")).is_zero());
        assert!(apply_p0(&DiffPoly::zero()).is_zero());
        let v = Series::constant(p("v"));
        let pv = apply_pencil(&v).unwrap();
        assert_eq!(pv.coeff_at(2).unwrap(), p("2*u*v1 + u1*v"));
        assert_eq!(pv.coeff_at(0).unwrap(), p("-1/2*v3"));
    }

    #[test]
    fn casimir_residual_examples() {
        let r = casimir_residual(7).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.top(), 2);
        assert_eq!(r.floor(), Some(-12));
        let w = solve_casimir_w(1);
        assert!(apply_p1(&w.coefficient(0)).is_zero());
        assert_eq!(apply_p0(&w.coefficient(0)), apply_p1(&w.coefficient(1)));
        let r1 = casimir_residual(4).unwrap().map(at_one);
        assert!(r1.is_zero());
    }

    #[test]
    fn ladder_closes() {
        let ladder = lenard_ladder(4).unwrap();
        assert_eq!(ladder.fields[0], hd_vector_field());
        assert_eq!(ladder.fields[0], p("u^(-1/2)").diff_x_n(3).scale(&rat(-1, 2)));
        let k = solve_riccati_hd(9);
        for j in 0..=3 {
            assert_eq!(
                euler(&k.coefficient(2 * j + 1).scale(&rat(2, 1)), U),
                ladder.gradients[j as usize + 1]
            );
        }
    }

    #[test]
    fn factorization_identity() {
        for n in [0, 3, 8] {
            assert!(factorization_check(n).unwrap(), "order {n}");
        }
        let k = solve_riccati_hd(8).k;
        let w = solve_casimir_w(4).w;
        let lhs = factorization_lhs(&k, &w).unwrap();
        assert!(lhs.is_zero());
        let one = Series::constant(DiffPoly::one());
        let lhs1 = factorization_lhs(&k, &one).unwrap();
        assert!(lhs1.agrees_with(&Series::monomial(p("u1"), 2)));
        let kz = Series::monomial(DiffPoly::one(), 1);
        let v = Series::constant(p("v"));
        let flat = factorization_lhs(&kz, &v).unwrap();
        let expect = Series::from_terms(
            vec![(2, p("2*v1")), (0, p("-1/2*v3"))],
            2,
            Precision::Exact,
        )
        .unwrap();
        assert!(flat.agrees_with(&expect));
    }

    #[test]
    fn classical_constants() {
        assert_eq!(hd_classical_match().unwrap(), rat(-1, 4));
        assert_eq!(rho_form_constant().unwrap(), rat(-1, 4));
        assert!(at_one(&hd_vector_field()).is_zero());
    }

    #[test]
    fn kdv_riccati() {
        let h = solve_riccati_kdv(6);
        assert_eq!(h.coeff_at(-1).unwrap(), p("1/2*u"));
        assert_eq!(h.coeff_at(-2).unwrap(), p("-1/4*u1"));
        let r = h
            .diff_x()
            .add(&h.mul(&h).unwrap())
            .unwrap()
            .sub(&Series::from_terms(vec![(2, DiffPoly::one()), (0, u())], 2, Precision::Exact).unwrap())
            .unwrap();
        assert!(r.is_zero());
        let mut b = BTreeMap::new();
        b.insert(U, DiffPoly::zero());
        let h0 = h.try_map(|c| substitute(c, &b, hd_alphabet())).unwrap();
        assert!(h0.agrees_with(&Series::monomial(DiffPoly::one(), 1)));
    }
}
