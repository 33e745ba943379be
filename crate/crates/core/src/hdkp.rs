//! HD-KP hierarchy for a generic Laurent series `k = k_m1 z + sum_l k_l z^{-l}`.
//!
//! Faà di Bruno polynomials `k^(j) = (∂ + k)^j 1`, currents `K^(l)` defined as
//! the unique element of `span<k^(2), k^(3), ...>` equal to `z^l + O(z)`, the
//! flows `∂k/∂t_l = ∂_x K^(l)`, and the change of variables to the
//! `q`-coefficients. The same code runs on the free series (coefficients are
//! independent generators), on the constrained series (the Riccati solution
//! written through `u = k_m1^2`) and on the trivial series `k = z`.

use std::collections::BTreeMap;


use crate::algebra::{evolve, monomial_pow, substitute, AlgebraError, DiffPoly, Gen};
use crate::hdcore::{lenard_ladder, solve_riccati_hd, HdError, Series};
use crate::laurent::{LaurentError, Precision};
use crate::rings::{hd_alphabet, k, k_gen, k_index, U};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HdkpError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Hd(#[from] HdError),
    #[error("series has no leading z coefficient")]
    NoLeadingTerm,
}

/// `k_m1 z + k0 + k1 z^-1 + ... + k_depth z^-depth`, all coefficients free.
pub fn free_k(depth: usize) -> Series {
    let terms = (-1..=depth as i32).map(|m| (-m, k(m)));
    Series::from_terms(terms, 1, Precision::Known(-(depth as i32))).expect("valid window")
}

/// `k = z`.
pub fn trivial_k() -> Series {
    Series::monomial(DiffPoly::one(), 1)
}

/// Bindings `k_l ↦ k_l(u)|_{u = k_m1^2}` from the Riccati solution, `l = 0..=depth`.
pub fn constraint_bindings(depth: usize) -> Result<BTreeMap<Gen, DiffPoly>, HdkpError> {
    let riccati = solve_riccati_hd(depth);
    let to_k = u_to_k_bindings();
    let mut out = BTreeMap::new();
    for l in 0..=depth as i32 {
        out.insert(k_gen(l), substitute(&riccati.coefficient(l), &to_k, hd_alphabet())?);
    }
    Ok(out)
}

/// `u ↦ k_m1^2`.
pub fn u_to_k_bindings() -> BTreeMap<Gen, DiffPoly> {
    let mut b = BTreeMap::new();
    b.insert(U, k(-1).pow(2));
    b
}

/// The Riccati solution expressed through `k_m1`: `k_m1 z + k_0(k_m1) + ...`.
pub fn constrained_k(depth: usize) -> Result<Series, HdkpError> {
    let b = constraint_bindings(depth)?;
    Ok(free_k(depth).try_map(|c| substitute(c, &b, hd_alphabet()))?)
}

/// Applies the HD constraint to an expression in the free `k`-ring.
pub fn constrain(p: &DiffPoly, depth: usize) -> Result<DiffPoly, HdkpError> {
    Ok(substitute(p, &constraint_bindings(depth)?, hd_alphabet())?)
}

/// Faà di Bruno polynomials of a series `k` with nonzero monomial leading coefficient.
#[derive(Clone, Debug)]
pub struct FdbBasis {
    k: Series,
    inv_lead: DiffPoly,
    /// `positive[j] = k^(j)`, `j >= 0`.
    positive: Vec<Series>,
    /// `negative[i] = k^(-(i+1))`.
    negative: Vec<Series>,
}

impl FdbBasis {
    pub fn new(k: Series) -> Result<Self, HdkpError> {
        let lead = k.coeff_at(1)?;
        if lead.is_zero() || k.top() != 1 {
            return Err(HdkpError::NoLeadingTerm);
        }
        let inv_lead = monomial_pow(&lead, -1, 1, hd_alphabet())?;
        Ok(FdbBasis {
            k,
            inv_lead,
            positive: vec![Series::constant(DiffPoly::one())],
            negative: Vec::new(),
        })
    }

    pub fn k(&self) -> &Series {
        &self.k
    }

    /// `lead^{-j}` for `j >= 0`.
    pub fn inv_lead_pow(&self, j: usize) -> DiffPoly {
        self.inv_lead.pow(j as u32)
    }

    /// Apply `∂ + k`.
    pub fn raise(&self, s: &Series) -> Result<Series, HdkpError> {
        Ok(s.diff_x().add(&self.k.mul(s)?)?)
    }

    /// Extends the positive part through `k^(jmax)`.
    pub fn extend(&mut self, jmax: usize) -> Result<(), HdkpError> {
        while self.positive.len() <= jmax {
            let next = self.raise(self.positive.last().expect("k^(0)"))?;
            self.positive.push(next);
        }
        Ok(())
    }

    /// Extends the negative part through `k^(jmin)`, `jmin < 0`, by solving
    /// `k^(j+1) = ∂ k^(j) + k k^(j)` downward in `z`.
    pub fn extend_negative(&mut self, jmin: i32) -> Result<(), HdkpError> {
        while -(self.negative.len() as i32) > jmin {
            let j = -(self.negative.len() as i32) - 1;
            let upper = self.element(j + 1).expect("already computed").clone();
            let next = self.lower(&upper, j)?;
            self.negative.push(next);
        }
        Ok(())
    }

    fn lower(&self, upper: &Series, j: i32) -> Result<Series, HdkpError> {
        let k_floor = self.k.floor().unwrap_or(i32::MIN / 4);
        let floor = match (self.k.floor(), upper.floor()) {
            (None, None) => None,
            _ => Some((k_floor - 1 + j).max(upper.floor().map_or(i32::MIN / 4, |f| f - 1))),
        };
        // stop at an exact zero tail for exact inputs
        let stop = floor.unwrap_or(j - 2 * (upper.top() - upper.low() + 8));
        let mut a: BTreeMap<i32, DiffPoly> = BTreeMap::new();
        let get = |a: &BTreeMap<i32, DiffPoly>, d: i32| a.get(&d).cloned().unwrap_or_default();
        let mut e = j + 1;
        while e > stop {
            let mut rhs = upper.coeff_at(e)?;
            rhs.sub_assign_ref(&get(&a, e).diff_x());
            let mut b = e - j;
            while b <= 0 {
                if !self.k.is_known(b) {
                    break;
                }
                let cb = self.k.coeff_at(b)?;
                let ab = get(&a, e - b);
                if !cb.is_zero() && !ab.is_zero() {
                    rhs.sub_assign_ref(&cb.mul_ref(&ab));
                }
                b += 1;
            }
            a.insert(e - 1, rhs.mul_ref(&self.inv_lead));
            e -= 1;
        }
        let precision = match floor {
            Some(f) => Precision::Known(f),
            None => Precision::Exact,
        };
        Ok(Series::from_terms(a, j, precision)?)
    }

    /// `k^(j)` if computed.
    pub fn element(&self, j: i32) -> Option<&Series> {
        if j >= 0 {
            self.positive.get(j as usize)
        } else {
            self.negative.get((-j - 1) as usize)
        }
    }

    pub fn max_index(&self) -> usize {
        self.positive.len() - 1
    }

    /// Coordinates `d_2..d_top` of the span part of `s` (top-down triangular solve)
    /// and the remainder `s - sum_j d_j k^(j)`.
    pub fn span_coordinates(&mut self, s: &Series) -> Result<(Vec<DiffPoly>, Series), HdkpError> {
        let top = s.top().max(1) as usize;
        self.extend(top)?;
        let mut coords = vec![DiffPoly::zero(); top + 1];
        for m in (2..=top).rev() {
            let mut acc = s.coeff_at(m as i32)?;
            for (j, c) in coords.iter().enumerate().skip(m + 1) {
                if c.is_zero() {
                    continue;
                }
                let entry = self.positive[j].coeff_at(m as i32)?;
                acc.sub_assign_ref(&c.mul_ref(&entry));
            }
            coords[m] = acc.mul_ref(&self.inv_lead_pow(m));
        }
        let mut rem = s.clone();
        for (j, c) in coords.iter().enumerate().skip(2) {
            if !c.is_zero() {
                rem = rem.sub(&self.positive[j].map(|e| e.mul_ref(c)))?;
            }
        }
        Ok((coords.split_off(2), rem))
    }
}

/// `FdbBasis` for the free series, through `k^(jmax)`.
pub fn fdb(jmax: usize, depth: usize) -> Result<FdbBasis, HdkpError> {
    let mut b = FdbBasis::new(free_k(depth))?;
    b.extend(jmax)?;
    Ok(b)
}

/// Free basis extended down to `k^(jmin)`.
pub fn fdb_negative(jmin: i32, depth: usize) -> Result<FdbBasis, HdkpError> {
    let mut b = FdbBasis::new(free_k(depth))?;
    b.extend_negative(jmin)?;
    Ok(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Current {
    pub index: usize,
    /// `z^l + K^l_{-1} z + sum_m K^l_m z^{-m}`.
    pub series: Series,
    /// `combo[j - 2] = c_j` with `series = sum_j c_j k^(j)`.
    pub combo: Vec<DiffPoly>,
}

/// Current `K^(l)` of the series behind `basis`, `l >= 1` (`K^(1) = k`).
pub fn current_in(basis: &mut FdbBasis, l: usize) -> Result<Current, HdkpError> {
    if l == 1 {
        return Ok(Current {
            index: 1,
            series: basis.k().clone(),
            combo: Vec::new(),
        });
    }
    basis.extend(l)?;
    let mut c = vec![DiffPoly::zero(); l + 1];
    c[l] = basis.inv_lead_pow(l);
    for m in (2..l).rev() {
        let mut acc = DiffPoly::zero();
        for (j, cj) in c.iter().enumerate().skip(m + 1) {
            let entry = basis.positive[j].coeff_at(m as i32)?;
            acc.add_product(cj, &entry);
        }
        c[m] = -acc.mul_ref(&basis.inv_lead_pow(m));
    }
    let mut series: Option<Series> = None;
    for (j, cj) in c.iter().enumerate().skip(2) {
        let part = basis.positive[j].map(|e| e.mul_ref(cj));
        series = Some(match series {
            None => part,
            Some(s) => s.add(&part)?,
        });
    }
    let series = series.expect("l >= 2").restrict_top(l as i32)?;
    Ok(Current {
        index: l,
        series,
        combo: c.split_off(2),
    })
}

trait AddProduct {
    fn add_product(&mut self, a: &DiffPoly, b: &DiffPoly);
}

impl AddProduct for DiffPoly {
    fn add_product(&mut self, a: &DiffPoly, b: &DiffPoly) {
        if !a.is_zero() && !b.is_zero() {
            self.add_assign_ref(&a.mul_ref(b));
        }
    }
}

/// Current `K^(l)` of the free series of the given depth.
pub fn current(l: usize, depth: usize) -> Result<Current, HdkpError> {
    current_in(&mut FdbBasis::new(free_k(depth))?, l)
}

/// Time derivatives of the `k` coefficients under `∂k/∂t_j = ∂_x K^(j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowDerivation {
    pub time: usize,
    /// `assignment[m]` is `∂k_m/∂t_j` for every `m >= -1` inside the known window.
    pub assignment: BTreeMap<i32, DiffPoly>,
}

impl FlowDerivation {
    pub fn get(&self, m: i32) -> Option<&DiffPoly> {
        self.assignment.get(&m)
    }

    /// Vector field on the `k`-ring generators.
    pub fn field(&self, g: Gen) -> Option<DiffPoly> {
        k_index(g).and_then(|m| self.assignment.get(&m).cloned())
    }

    pub fn is_zero(&self) -> bool {
        self.assignment.values().all(|p| p.is_zero())
    }

    /// `∂k/∂t_j` as a series.
    pub fn series(&self) -> Result<Series, HdkpError> {
        let deepest = self.assignment.keys().max().copied().unwrap_or(-1);
        Ok(Series::from_terms(
            self.assignment.iter().map(|(m, p)| (-m, p.clone())),
            1,
            Precision::Known(-deepest),
        )?)
    }
}

pub fn flow_in(basis: &mut FdbBasis, j: usize) -> Result<FlowDerivation, HdkpError> {
    let cur = current_in(basis, j)?;
    let d = cur.series.diff_x();
    let floor = d.floor().unwrap_or(-(basis.k().low()).max(0) - 1);
    let deepest = match basis.k().floor() {
        Some(kf) => (-floor).min(-kf),
        None => -floor,
    };
    let mut assignment = BTreeMap::new();
    for m in -1..=deepest {
        if d.is_known(-m) {
            assignment.insert(m, d.coeff_at(-m)?);
        }
    }
    Ok(FlowDerivation { time: j, assignment })
}

/// HD-KP flow `t_j` on the free series of the given depth.
pub fn hdkp_flow(j: usize, depth: usize) -> Result<FlowDerivation, HdkpError> {
    flow_in(&mut FdbBasis::new(free_k(depth))?, j)
}

/// `∂u/∂t_j` along the HD hierarchy: `X_i` for `j = 2i + 3`, zero for even `j`.
pub fn hd_time_derivative(j: usize) -> Result<DiffPoly, HdkpError> {
    if j.is_multiple_of(2) || j < 3 {
        return Ok(DiffPoly::zero());
    }
    let i = (j - 3) / 2;
    Ok(lenard_ladder(i)?.fields[i].clone())
}

/// Checks `(∂ + 2k) ∂k/∂t_j = z^2 ∂u/∂t_j` under the HD constraint at the given depth.
pub fn conservation_consistency(j: usize, depth: usize) -> Result<bool, HdkpError> {
    let (lhs, rhs) = conservation_sides(j, depth)?;
    Ok(lhs.agrees_with(&rhs))
}

/// Both sides of the consistency identity, in the `k`-ring with `u = k_m1^2`.
pub fn conservation_sides(j: usize, depth: usize) -> Result<(Series, Series), HdkpError> {
    let kc = constrained_k(depth)?;
    let mut basis = FdbBasis::new(kc.clone())?;
    let flow = flow_in(&mut basis, j)?.series()?;
    let two_k = kc.map(|c| c.scale(&crate::algebra::rat(2, 1)));
    let lhs = flow.diff_x().add(&two_k.mul(&flow)?)?;
    let ut = substitute(&hd_time_derivative(j)?, &u_to_k_bindings(), hd_alphabet())?;
    Ok((lhs, Series::monomial(ut, 2)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommuteReport {
    /// Coefficient indices `m` for which the mixed derivative was resolvable.
    pub checked: Vec<i32>,
    /// Indices with a nonzero residual.
    pub failures: Vec<i32>,
}

impl CommuteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && !self.checked.is_empty()
    }
}

/// `∂_{t_i} ∂_{t_j} k_m - ∂_{t_j} ∂_{t_i} k_m` for `m = -1..depth-2`, computed by
/// prolonging each flow through the coefficients and their x-derivatives.
pub fn commute_check_in(
    k: Series,
    i: usize,
    j: usize,
    depth: usize,
) -> Result<CommuteReport, HdkpError> {
    let mut basis = FdbBasis::new(k)?;
    let fi = flow_in(&mut basis, i)?;
    let fj = flow_in(&mut basis, j)?;
    let mut report = CommuteReport {
        checked: Vec::new(),
        failures: Vec::new(),
    };
    for m in -1..(depth as i32 - 1) {
        let (Some(a), Some(b)) = (fj.get(m), fi.get(m)) else {
            break;
        };
        let (Some(di_fj), Some(dj_fi)) = (evolve(a, |g| fi.field(g)), evolve(b, |g| fj.field(g)))
        else {
            break;
        };
        report.checked.push(m);
        if di_fj != dj_fi {
            report.failures.push(m);
        }
    }
    Ok(report)
}

pub fn commute_check(i: usize, j: usize, n: usize, depth: usize) -> Result<CommuteReport, HdkpError> {
    commute_check_in(free_k(n), i, j, depth)
}

/// Coefficients of `z = q_{-1} k + sum_{j>=0} q_j k^(-j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QChange {
    /// `q[m]` for `m = -1..=depth`.
    pub q: BTreeMap<i32, DiffPoly>,
    /// `q_{-1} k + sum_j q_j k^(-j)`, equal to `z` on its known window.
    pub reconstruction: Series,
}

pub fn q_change_in(k: Series, depth: usize) -> Result<QChange, HdkpError> {
    let mut basis = FdbBasis::new(k)?;
    basis.extend_negative(-(depth as i32))?;
    let kk = basis.k().clone();
    let mut q = BTreeMap::new();
    q.insert(-1, basis.inv_lead.clone());
    // degree -j row: q_{-1} c_{-j} + sum_{i<=j} q_i [k^(-i)]_{-j} = 0, pivot [k^(-j)]_{-j}
    for jj in 0..=depth as i32 {
        let mut acc = q[&-1].mul_ref(&kk.coeff_at(-jj)?);
        for i in 0..jj {
            let e = basis.element(-i).expect("computed").coeff_at(-jj)?;
            acc.add_product(&q[&i], &e);
        }
        q.insert(jj, -acc.mul_ref(&basis.inv_lead_pow(0).mul_ref(&lead_pow(&basis, jj)?)));
    }
    let mut rec = kk.map(|c| c.mul_ref(&q[&-1]));
    for jj in 0..=depth as i32 {
        let e = basis.element(-jj).expect("computed");
        rec = rec.add(&e.map(|c| c.mul_ref(&q[&jj])))?;
    }
    Ok(QChange {
        q,
        // rows below -depth are unsolved
        reconstruction: rec.truncate(-(depth as i32))?,
    })
}

fn lead_pow(basis: &FdbBasis, j: i32) -> Result<DiffPoly, HdkpError> {
    // [k^(-j)]_{-j} = lead^{-j}, so its inverse is lead^j
    Ok(monomial_pow(&basis.inv_lead, -j, 1, hd_alphabet())?)
}

pub fn q_change(depth: usize) -> Result<QChange, HdkpError> {
    q_change_in(free_k(depth + 1), depth)
}
