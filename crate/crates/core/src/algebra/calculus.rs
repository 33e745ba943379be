//! Variational calculus and structural operations on [`DiffPoly`].

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::alphabet::Alphabet;
use super::mono::{Exponent, Gen, JetVar, Mono};
use super::poly::DiffPoly;
use super::{AlgebraError, Rational};

/// Euler–Lagrange operator `sum_n (-D)^n dp/d(g, n)`: the variational
/// derivative of the functional `∮ p dx` with respect to `g`.
pub fn euler(p: &DiffPoly, g: Gen) -> DiffPoly {
    let Some(top) = p.max_order(g) else {
        return DiffPoly::zero();
    };
    let mut out = DiffPoly::zero();
    for n in 0..=top {
        let mut part = p.partial(JetVar::new(g, n));
        for _ in 0..n {
            part = -part.diff_x();
        }
        out.add_assign_ref(&part);
    }
    out
}

/// True when the Euler operator annihilates `p` with respect to `g` and
/// every other generator occurring in `p`.
pub fn is_total_derivative(p: &DiffPoly, g: Gen) -> bool {
    let mut gens = p.generators();
    gens.insert(g);
    gens.into_iter().all(|h| euler(p, h).is_zero())
}

fn exact_root(n: &BigInt, r: u32) -> Option<BigInt> {
    if n.is_negative() {
        if r.is_multiple_of(2) {
            return None;
        }
        return exact_root(&-n, r).map(|x| -x);
    }
    let x = n.nth_root(r);
    (x.pow(r) == *n).then_some(x)
}

/// Rational `r`-th root, positive branch for even `r`.
pub fn rational_root(c: &Rational, r: u32) -> Option<Rational> {
    if r == 0 {
        return None;
    }
    let num = exact_root(c.numer(), r)?;
    let den = exact_root(c.denom(), r)?;
    Some(Rational::new(num, den))
}

/// `c^(num/den)` for a rational `c`, when exact.
fn rational_pow(c: &Rational, num: i32, den: u32) -> Option<Rational> {
    let root = rational_root(c, den)?;
    if num < 0 && root.is_zero() {
        return None;
    }
    let p = num_traits::pow(root, num.unsigned_abs() as usize);
    Some(if num < 0 { p.recip() } else { p })
}

/// Raises a single-term polynomial to the power `num/den`.
pub fn monomial_pow(
    p: &DiffPoly,
    num: i32,
    den: u32,
    alphabet: &Alphabet,
) -> Result<DiffPoly, AlgebraError> {
    if p.is_zero() {
        return if num > 0 {
            Ok(DiffPoly::zero())
        } else {
            Err(AlgebraError::NotAPerfectPower)
        };
    }
    let (c, m) = p.as_monomial().ok_or(AlgebraError::NotAMonomial)?;
    let mono = m
        .scaled_exponents(num, den as i32)
        .ok_or(AlgebraError::NotAPerfectPower)?;
    alphabet.check_mono(&mono)?;
    let coeff = rational_pow(c, num, den).ok_or(AlgebraError::NotAPerfectPower)?;
    Ok(DiffPoly::term(coeff, mono))
}

/// Exact `r`-th root of a monomial; the positive-coefficient branch is chosen for even `r`.
pub fn mono_root(p: &DiffPoly, r: u32, alphabet: &Alphabet) -> Result<DiffPoly, AlgebraError> {
    if r == 0 {
        return Err(AlgebraError::NotAPerfectPower);
    }
    let (_, m) = p.as_monomial().ok_or(AlgebraError::NotAMonomial)?;
    let root_mono = m
        .scaled_exponents(1, r as i32)
        .ok_or(AlgebraError::NotAPerfectPower)?;
    if alphabet.check_mono(&root_mono).is_err() {
        return Err(AlgebraError::NotAPerfectPower);
    }
    monomial_pow(p, 1, r, alphabet)
}

/// Multiplies by the inverse of a single-term polynomial.
pub fn div_monomial(
    p: &DiffPoly,
    divisor: &DiffPoly,
    alphabet: &Alphabet,
) -> Result<DiffPoly, AlgebraError> {
    let inv = monomial_pow(divisor, -1, 1, alphabet)?;
    let (c, m) = inv.as_monomial().expect("inverse of a monomial is a monomial");
    Ok(p.mul_term(c, m))
}

/// Replaces every jet of a bound generator by the matching x-derivative of its binding.
pub fn substitute(
    p: &DiffPoly,
    bindings: &BTreeMap<Gen, DiffPoly>,
    alphabet: &Alphabet,
) -> Result<DiffPoly, AlgebraError> {
    if bindings.is_empty() {
        return Ok(p.clone());
    }
    let mut jets: HashMap<JetVar, DiffPoly> = HashMap::new();
    let mut powers: HashMap<(JetVar, Exponent), DiffPoly> = HashMap::new();
    let mut out = DiffPoly::zero();
    for (m, c) in p.terms() {
        let mut acc = DiffPoly::constant(c.clone());
        let mut free: Vec<(JetVar, Exponent)> = Vec::new();
        for &(v, e) in m.factors() {
            let Some(binding) = bindings.get(&v.gen) else {
                free.push((v, e));
                continue;
            };
            let factor = if let Some(f) = powers.get(&(v, e)) {
                f.clone()
            } else {
                let jet = jets
                    .entry(v)
                    .or_insert_with(|| binding.diff_x_n(v.order as usize))
                    .clone();
                let f = if e.is_integer() && e.halves() >= 0 {
                    jet.pow((e.halves() / 2) as u32)
                } else {
                    let (num, den) = e.ratio();
                    monomial_pow(&jet, num, den as u32, alphabet).map_err(|err| {
                        AlgebraError::Substitution(format!(
                            "{}^{} with binding of {}: {}",
                            alphabet.jet_name(v),
                            e,
                            alphabet.spec(v.gen).name,
                            err
                        ))
                    })?
                };
                powers.insert((v, e), f.clone());
                f
            };
            acc = acc.mul_ref(&factor);
            if acc.is_zero() {
                break;
            }
        }
        if !acc.is_zero() {
            let rest = Mono::from_factors(free);
            out.add_assign_ref(&acc.mul_term(&Rational::one(), &rest));
        }
    }
    Ok(out)
}

/// Applies the prolonged evolutionary vector field `g_t = field(g)` to `p`:
/// `sum_{(g,n)} dp/d(g,n) * D^n field(g)`. Returns `None` when `field` is
/// undefined for a generator that occurs in `p`.
pub fn evolve<F>(p: &DiffPoly, mut field: F) -> Option<DiffPoly>
where
    F: FnMut(Gen) -> Option<DiffPoly>,
{
    let mut base: HashMap<Gen, Option<DiffPoly>> = HashMap::new();
    let mut out = DiffPoly::zero();
    for v in p.jet_vars() {
        let f = base.entry(v.gen).or_insert_with(|| field(v.gen)).as_ref()?;
        let dv = f.diff_x_n(v.order as usize);
        if dv.is_zero() {
            continue;
        }
        out.add_assign_ref(&p.partial(v).mul_ref(&dv));
    }
    Some(out)
}
