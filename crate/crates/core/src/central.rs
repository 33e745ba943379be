//! The HD Central System.
//!
//! A family of currents `K^(1) = K^1_{-1} z + sum_l K^1_l z^-l` and
//! `K^(i) = z^i + K^i_{-1} z + sum_l K^i_l z^-l` (`i >= 2`) evolves by
//! `∂K^(l)/∂t_j = -π₋(K^(j) K^(l))`, where `π₋` is the projection onto
//! `<z, 1, z^-1, ...>` along `<K^(2), K^(3), ...>`. Each `K^(i)` is `z^i` plus
//! terms of degree `<= 1`, so the plus coordinates of a series are just its
//! coefficients in degrees `>= 2`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{evolve, DiffPoly, Gen, JetVar};
use crate::hdkp::{current_in, FdbBasis, HdkpError};
use crate::laurent::{Coefficient, LaurentError, LaurentSeries, Precision};
use crate::rings::CentralAlphabet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentralError {
    #[error("family of size {available} cannot represent current index {needed}")]
    InsufficientFamily { needed: usize, available: usize },
    #[error("current K^({index}) violates the required shape: {reason}")]
    Shape { index: usize, reason: String },
    #[error("non-finite state in flow t_{flow} at t = {t}")]
    NonFiniteState { flow: usize, t: f64 },
    #[error("invalid step {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Hdkp(#[from] HdkpError),
}

/// Currents `K^(1), ..., K^(M)` truncated below `z^-depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentFamily<C> {
    currents: Vec<LaurentSeries<C>>,
    depth: usize,
}

impl<C: Coefficient> CurrentFamily<C> {
    /// Validates the shape of every current and truncates all of them to `z^-depth`.
    pub fn new(currents: Vec<LaurentSeries<C>>, depth: usize) -> Result<Self, CentralError> {
        let floor = -(depth as i32);
        let mut out = Vec::with_capacity(currents.len());
        for (idx, s) in currents.into_iter().enumerate() {
            let i = idx + 1;
            let top = i as i32;
            let bad = |reason: &str| CentralError::Shape {
                index: i,
                reason: reason.to_string(),
            };
            if s.top() > top.max(1) {
                return Err(bad("degree above the index"));
            }
            if i >= 2 {
                if s.coeff_at(top)? != C::one() {
                    return Err(bad("leading coefficient is not 1"));
                }
                for d in 2..top {
                    if !s.coeff_at(d)?.is_zero() {
                        return Err(bad("nonzero gap coefficient"));
                    }
                }
            }
            let s = if s.is_exact() || s.floor() < Some(floor) {
                s.truncate(floor).map_err(|_| bad("window too shallow"))?
            } else if s.floor() == Some(floor) {
                s
            } else {
                return Err(bad("window too shallow"));
            };
            out.push(s.restrict_top(top.max(1))?);
        }
        Ok(CurrentFamily { currents: out, depth })
    }

    /// Family with every coefficient produced by `f(i, l)` for `K^i_l`.
    pub fn from_coefficients<F: FnMut(usize, i32) -> C>(
        max_index: usize,
        depth: usize,
        mut f: F,
    ) -> Self {
        let floor = -(depth as i32);
        let currents = (1..=max_index)
            .map(|i| {
                let mut terms: Vec<(i32, C)> = (-1..=depth as i32).map(|l| (-l, f(i, l))).collect();
                if i >= 2 {
                    terms.push((i as i32, C::one()));
                }
                LaurentSeries::from_terms(terms, (i as i32).max(1), Precision::Known(floor))
                    .expect("window contains degree 1")
            })
            .collect();
        CurrentFamily { currents, depth }
    }

    /// `K^(1) = z`, `K^(i) = z^i`.
    pub fn trivial(max_index: usize, depth: usize) -> Self {
        Self::from_coefficients(max_index, depth, |i, l| {
            if i == 1 && l == -1 {
                C::one()
            } else {
                C::zero()
            }
        })
    }

    /// `M`.
    pub fn max_index(&self) -> usize {
        self.currents.len()
    }

    /// `N`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `K^(i)`, `1 <= i <= M`.
    pub fn current(&self, i: usize) -> Result<&LaurentSeries<C>, CentralError> {
        self.currents
            .get(i.wrapping_sub(1))
            .ok_or(CentralError::InsufficientFamily {
                needed: i,
                available: self.max_index(),
            })
    }

    /// `K^i_l`, the coefficient of `z^-l`.
    pub fn coefficient(&self, i: usize, l: i32) -> Result<C, CentralError> {
        Ok(self.current(i)?.coeff_at(-l)?)
    }

    pub fn currents(&self) -> &[LaurentSeries<C>] {
        &self.currents
    }

    pub fn map<D: Coefficient, F: FnMut(&C) -> D>(&self, mut f: F) -> CurrentFamily<D> {
        CurrentFamily {
            currents: self.currents.iter().map(|s| s.map(&mut f)).collect(),
            depth: self.depth,
        }
    }

    /// Coefficients `K^i_l` in the order `i = 1..M`, `l = -1..N`.
    pub fn flatten(&self) -> Vec<C> {
        let mut out = Vec::with_capacity(self.max_index() * (self.depth + 2));
        for s in &self.currents {
            for l in -1..=self.depth as i32 {
                out.push(s.coeff_at(-l).expect("in window"));
            }
        }
        out
    }

    pub fn unflatten(max_index: usize, depth: usize, values: &[C]) -> Self {
        let stride = depth + 2;
        Self::from_coefficients(max_index, depth, |i, l| {
            values[(i - 1) * stride + (l + 1) as usize].clone()
        })
    }
}

/// Column label of `K^i_l`.
pub fn coefficient_label(i: usize, l: i32) -> String {
    if l < 0 {
        format!("K{i}_m1")
    } else {
        format!("K{i}_{l}")
    }
}

impl CurrentFamily<DiffPoly> {
    /// Free family: every `K^i_l` a distinct symbol of `alphabet`.
    pub fn free(alphabet: &CentralAlphabet) -> Self {
        Self::from_coefficients(alphabet.max_current(), alphabet.depth(), |i, l| {
            DiffPoly::gen(alphabet.symbol(i, l))
        })
    }

    /// Family of the currents of `k` (`K^(1) = k`), truncated below `z^-depth`.
    pub fn from_k(
        k: &LaurentSeries<DiffPoly>,
        max_index: usize,
        depth: usize,
    ) -> Result<Self, CentralError> {
        let mut basis = FdbBasis::new(k.clone())?;
        let mut currents = Vec::with_capacity(max_index);
        for l in 1..=max_index {
            currents.push(current_in(&mut basis, l)?.series);
        }
        Self::new(currents, depth)
    }

    /// Numeric family from jet values.
    pub fn eval<F: FnMut(JetVar) -> f64>(&self, mut jets: F) -> CurrentFamily<f64> {
        self.map(|p| p.eval(&mut jets))
    }

    /// Generators appearing as bare coefficients, mapped to `(i, degree)`.
    fn symbol_positions(&self) -> BTreeMap<Gen, (usize, i32)> {
        let mut out = BTreeMap::new();
        for (idx, s) in self.currents.iter().enumerate() {
            for (d, c) in s.terms() {
                if let Some(g) = bare_generator(c) {
                    out.insert(g, (idx + 1, d));
                }
            }
        }
        out
    }
}

fn bare_generator(p: &DiffPoly) -> Option<Gen> {
    let (coeff, mono) = p.as_monomial()?;
    if !num_traits::One::is_one(coeff) {
        return None;
    }
    match mono.factors() {
        [(v, e)] if v.order == 0 && e.halves() == 2 => Some(v.gen),
        _ => None,
    }
}

/// `S = sum_{m >= 2} s_m K^(m) + minus`, with `minus` supported in degrees `<= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiSplit<C> {
    pub coordinates: BTreeMap<usize, C>,
    pub minus: LaurentSeries<C>,
}

pub fn pi_split<C: Coefficient>(
    s: &LaurentSeries<C>,
    family: &CurrentFamily<C>,
) -> Result<PiSplit<C>, CentralError> {
    let top = s.top().max(1) as usize;
    if top > family.max_index() {
        return Err(CentralError::InsufficientFamily {
            needed: top,
            available: family.max_index(),
        });
    }
    let mut coordinates = BTreeMap::new();
    let mut minus = s.clone();
    for m in 2..=top {
        let c = s.coeff_at(m as i32)?;
        if !c.is_zero() {
            minus = minus.sub(&family.current(m)?.scale(&c))?;
            coordinates.insert(m, c);
        }
    }
    Ok(PiSplit {
        coordinates,
        minus: minus.restrict_top(1)?,
    })
}

fn check_closure<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<(), CentralError> {
    if i == 0 || j == 0 || i + j > family.max_index() {
        return Err(CentralError::InsufficientFamily {
            needed: i + j,
            available: family.max_index(),
        });
    }
    Ok(())
}

/// `∂K^(i)/∂t_j = -π₋(K^(j) K^(i))`.
pub fn cs_rhs_projection<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<LaurentSeries<C>, CentralError> {
    check_closure(i, j, family)?;
    let product = family.current(j)?.mul(family.current(i)?)?;
    Ok(pi_split(&product, family)?.minus.neg())
}

/// [`cs_rhs_projection`], or `None` when the truncation leaves no known coefficient.
fn known_rhs<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<Option<LaurentSeries<C>>, CentralError> {
    match cs_rhs_projection(i, j, family) {
        Ok(d) => Ok(Some(d)),
        Err(CentralError::Laurent(LaurentError::EmptyWindow { .. })) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The plus part of `K^(i) K^(j)` written out as a combination of currents.
fn explicit_plus<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<LaurentSeries<C>, CentralError> {
    let k = |m: usize| family.current(m);
    let c = |m: usize, l: i32| family.coefficient(m, l);
    let mut acc: Vec<LaurentSeries<C>> = Vec::new();
    match (i.min(j), i.max(j)) {
        (1, 1) => {
            let a = c(1, -1)?;
            acc.push(k(2)?.scale(&a.mul(&a)));
        }
        (1, j) => {
            let a = c(1, -1)?;
            acc.push(k(j + 1)?.scale(&a));
            acc.push(k(j)?.scale(&c(1, 0)?));
            acc.push(k(2)?.scale(&c(j, -1)?.mul(&a)));
            for l in 1..=j as i32 - 2 {
                acc.push(k(j - l as usize)?.scale(&c(1, l)?));
            }
        }
        _ => {
            let (ai, aj) = (c(i, -1)?, c(j, -1)?);
            acc.push(k(i + j)?.clone());
            acc.push(k(j + 1)?.scale(&ai));
            acc.push(k(i + 1)?.scale(&aj));
            acc.push(k(2)?.scale(&ai.mul(&aj)));
            acc.push(k(j)?.scale(&c(i, 0)?));
            acc.push(k(i)?.scale(&c(j, 0)?));
            for l in 1..=i as i32 - 2 {
                acc.push(k(i - l as usize)?.scale(&c(j, l)?));
            }
            for l in 1..=j as i32 - 2 {
                acc.push(k(j - l as usize)?.scale(&c(i, l)?));
            }
        }
    }
    let mut sum = acc.pop().expect("nonempty");
    for s in &acc {
        sum = sum.add(s)?;
    }
    Ok(sum)
}

/// `∂K^(i)/∂t_j` from the explicit quadratic formulas: the general one for
/// `i, j >= 2`, the one for `k = K^(1)` when either index is 1, and
/// `k_x + k^2 = k_{-1}^2 K^(2)` read as the `t_1` flow when both are.
pub fn cs_rhs_explicit<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<LaurentSeries<C>, CentralError> {
    Ok(cs_rhs_explicit_unrestricted(i, j, family)?.restrict_top(1)?)
}

fn cs_rhs_explicit_unrestricted<C: Coefficient>(
    i: usize,
    j: usize,
    family: &CurrentFamily<C>,
) -> Result<LaurentSeries<C>, CentralError> {
    check_closure(i, j, family)?;
    let product = family.current(i)?.mul(family.current(j)?)?;
    Ok(explicit_plus(i, j, family)?.sub(&product)?)
}

/// Mixed second derivatives of the coefficients of one current.
#[derive(Clone, Debug, PartialEq)]
pub struct CommuteResidual {
    /// `(l, m)` pairs for which `∂_i ∂_j K^l_m - ∂_j ∂_i K^l_m` was computable.
    pub checked: Vec<(usize, i32)>,
    /// Pairs with a nonzero residual.
    pub nonzero: Vec<(usize, i32, DiffPoly)>,
}

impl CommuteResidual {
    pub fn vanishes(&self) -> bool {
        self.nonzero.is_empty() && !self.checked.is_empty()
    }
}

/// Commutator of the `t_i` and `t_j` flows on every current `K^(l)` with
/// `i + j + l <= M`, for the coefficients `K^l_m`, `m = -1..depth-2`.
pub fn cs_commute_residual(
    i: usize,
    j: usize,
    family: &CurrentFamily<DiffPoly>,
    depth: usize,
) -> Result<CommuteResidual, CentralError> {
    let m_max = family.max_index();
    if i + j + 1 > m_max {
        return Err(CentralError::InsufficientFamily {
            needed: i + j + 1,
            available: m_max,
        });
    }
    let positions = family.symbol_positions();
    let flow = |t: usize| -> Result<BTreeMap<usize, LaurentSeries<DiffPoly>>, CentralError> {
        let mut out = BTreeMap::new();
        for l in 1..=m_max - t {
            if let Some(d) = known_rhs(l, t, family)? {
                out.insert(l, d);
            }
        }
        Ok(out)
    };
    let (di, dj) = (flow(i)?, flow(j)?);
    let field = |d: &BTreeMap<usize, LaurentSeries<DiffPoly>>, g: Gen| -> Option<DiffPoly> {
        let (l, deg) = positions.get(&g)?;
        d.get(l)?.coeff_at(*deg).ok()
    };
    let mut out = CommuteResidual {
        checked: Vec::new(),
        nonzero: Vec::new(),
    };
    for l in 1..=m_max - i - j {
        for m in -1..depth as i32 - 1 {
            let (Some(a), Some(b)) = (
                dj.get(&l).and_then(|s| s.get(-m)),
                di.get(&l).and_then(|s| s.get(-m)),
            ) else {
                break;
            };
            let ij = evolve(a, |g| field(&di, g));
            let ji = evolve(b, |g| field(&dj, g));
            let (Some(ij), Some(ji)) = (ij, ji) else {
                break;
            };
            out.checked.push((l, m));
            let r = ij - ji;
            if !r.is_zero() {
                out.nonzero.push((l, m, r));
            }
        }
    }
    Ok(out)
}

/// Numeric family on the Riccati locus: the currents of the constrained `k`,
/// with `k_m1` and its x-derivatives set to `jets` (zero past the end).
/// `K^(2) = z^2` holds exactly, so the `t_2` flow is stationary on it.
pub fn riccati_family(max_index: usize, depth: usize, jets: &[f64]) -> Result<CurrentFamily<f64>, CentralError> {
    let k = crate::hdkp::constrained_k(depth + max_index)?;
    let family = CurrentFamily::from_k(&k, max_index, depth)?;
    Ok(family.eval(|v| {
        debug_assert_eq!(v.gen, crate::rings::k_gen(-1), "constrained currents depend on k_m1 only");
        jets.get(v.order as usize).copied().unwrap_or(0.0)
    }))
}

/// Outcome of [`spatialization_check`]; each list holds the indices that failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatializationReport {
    pub riccati_form: bool,
    pub current_relation_failures: Vec<usize>,
    pub first_flow_failures: Vec<usize>,
    /// Number of coefficient comparisons made.
    pub compared: usize,
}

impl SpatializationReport {
    pub fn passed(&self) -> bool {
        self.riccati_form
            && self.current_relation_failures.is_empty()
            && self.first_flow_failures.is_empty()
            && self.compared > 0
    }
}

/// On the currents of a series `k`, checks
/// `∂_x K^(j) + k K^(j) = k_{-1} K^(j+1) + k_0 K^(j) + K^j_{-1} k_{-1} K^(2) + sum_l k_l K^(j-l)`,
/// `∂_x k + k^2 = k_{-1}^2 K^(2)`, and that the `t_1` flow of every current is its x-derivative.
pub fn spatialization_check(
    k: &LaurentSeries<DiffPoly>,
    max_index: usize,
    depth: usize,
) -> Result<SpatializationReport, CentralError> {
    let family = CurrentFamily::from_k(k, max_index, depth)?;
    let kk = family.current(1)?;
    let mut compared = 0;
    let mut agree = |a: &LaurentSeries<DiffPoly>, b: &LaurentSeries<DiffPoly>| {
        let floor = a.floor().max(b.floor()).unwrap_or(0);
        compared += (a.top().max(b.top()) - floor + 1).max(0) as usize;
        a.agrees_with(b)
    };
    let lhs1 = kk.diff_x().add(&kk.mul(kk)?)?;
    let riccati_form = agree(&lhs1, &explicit_plus(1, 1, &family)?);
    let mut current_relation_failures = Vec::new();
    let mut first_flow_failures = Vec::new();
    for j in 1..max_index {
        let kj = family.current(j)?;
        if j >= 2 {
            let lhs = kj.diff_x().add(&kk.mul(kj)?)?;
            if !agree(&lhs, &explicit_plus(1, j, &family)?) {
                current_relation_failures.push(j);
            }
        }
        let flow = cs_rhs_projection(j, 1, &family)?;
        if !agree(&flow, &kj.diff_x()) {
            first_flow_failures.push(j);
        }
    }
    Ok(SpatializationReport {
        riccati_form,
        current_relation_failures,
        first_flow_failures,
        compared,
    })
}

/// Numeric state of a truncated family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CSState {
    pub max_index: usize,
    pub depth: usize,
    /// `K^i_l` in [`CurrentFamily::flatten`] order.
    pub values: Vec<f64>,
    /// Elapsed time per flow index.
    pub times: BTreeMap<usize, f64>,
    /// `valid[i - 1]`: coefficients `K^i_l` with `l <= valid[i - 1]` are trustworthy.
    pub valid: Vec<i32>,
}

impl CSState {
    pub fn new(family: &CurrentFamily<f64>) -> Result<Self, CentralError> {
        let values = family.flatten();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CentralError::NonFiniteState { flow: 0, t: 0.0 });
        }
        Ok(CSState {
            max_index: family.max_index(),
            depth: family.depth(),
            values,
            times: BTreeMap::new(),
            valid: vec![family.depth() as i32; family.max_index()],
        })
    }

    pub fn family(&self) -> CurrentFamily<f64> {
        CurrentFamily::unflatten(self.max_index, self.depth, &self.values)
    }

    pub fn labels(&self) -> Vec<String> {
        (1..=self.max_index)
            .flat_map(|i| (-1..=self.depth as i32).map(move |l| coefficient_label(i, l)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowSpec {
    pub time: usize,
    pub duration: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsSnapshot {
    pub step: usize,
    pub flow: usize,
    pub t: f64,
    pub values: Vec<f64>,
    pub closure_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsTrajectory {
    pub labels: Vec<String>,
    pub snapshots: Vec<CsSnapshot>,
    pub final_state: CSState,
}

impl CsTrajectory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,flow,t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push_str(",closure_residual\n");
        for s in &self.snapshots {
            out.push_str(&format!("{},{},{:e}", s.step, s.flow, s.t));
            for v in &s.values {
                out.push_str(&format!(",{v:e}"));
            }
            out.push_str(&format!(",{:e}\n", s.closure_residual));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Right-hand side of the `t_j` flow on the flat coefficient vector; untracked
/// currents and coefficients whose derivative is out of the window stay frozen.
fn flow_rhs(j: usize, max_index: usize, depth: usize, values: &[f64]) -> Result<Vec<f64>, CentralError> {
    let family = CurrentFamily::unflatten(max_index, depth, values);
    let stride = depth + 2;
    let mut out = vec![0.0; values.len()];
    for i in 1..=max_index - j {
        let Some(d) = known_rhs(i, j, &family)? else {
            continue;
        };
        for l in -1..=depth as i32 {
            if let Some(v) = d.get(-l) {
                out[(i - 1) * stride + (l + 1) as usize] = *v;
            }
        }
    }
    Ok(out)
}

/// Classical fourth-order Runge-Kutta integration of the truncated system,
/// one flow after another. Each flow runs `round(duration / step)` equal steps.
pub fn cs_integrate(state: CSState, flows: &[FlowSpec]) -> Result<CsTrajectory, CentralError> {
    let mut state = state;
    let labels = state.labels();
    let mut snapshots = Vec::new();
    let (m, n) = (state.max_index, state.depth);
    let mut step_no = 0;
    for f in flows {
        let j = f.time;
        if j == 0 || j >= m {
            return Err(CentralError::InsufficientFamily {
                needed: j + 1,
                available: m,
            });
        }
        if !(f.step > 0.0 && f.step.is_finite() && f.duration >= 0.0) {
            return Err(CentralError::InvalidStep(f.step));
        }
        let steps = ((f.duration / f.step).round() as usize).max(1);
        let h = f.duration / steps as f64;
        let t0 = state.times.get(&j).copied().unwrap_or(0.0);
        update_validity(&mut state, j);
        let top = m - j;
        let closure = |vals: &[f64], valid: &[i32]| -> f64 {
            let base = (top - 1) * (n + 2);
            (-1..=valid[top - 1])
                .map(|l| vals[base + (l + 1) as usize].abs())
                .fold(0.0, f64::max)
        };
        snapshots.push(CsSnapshot {
            step: step_no,
            flow: j,
            t: t0,
            values: state.values.clone(),
            closure_residual: closure(&state.values, &state.valid),
        });
        for s in 1..=steps {
            let y = &state.values;
            let k1 = flow_rhs(j, m, n, y)?;
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = flow_rhs(j, m, n, &y2)?;
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = flow_rhs(j, m, n, &y3)?;
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = flow_rhs(j, m, n, &y4)?;
            let next: Vec<f64> = (0..y.len())
                .map(|q| y[q] + h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]))
                .collect();
            let t = t0 + h * s as f64;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(CentralError::NonFiniteState { flow: j, t });
            }
            state.values = next;
            step_no += 1;
            snapshots.push(CsSnapshot {
                step: step_no,
                flow: j,
                t,
                values: state.values.clone(),
                closure_residual: closure(&state.values, &state.valid),
            });
        }
        state.times.insert(j, t0 + f.duration);
    }
    Ok(CsTrajectory {
        labels,
        snapshots,
        final_state: state,
    })
}

/// The `t_j` derivative of `K^i_l` reads `K^i_{l+j}`, `K^j_{l+i}` and `K^m_l`
/// for `m <= i + j`; untracked currents become invalid.
fn update_validity(state: &mut CSState, j: usize) {
    let m = state.max_index;
    let old = state.valid.clone();
    for i in 1..=m {
        state.valid[i - 1] = if i + j > m {
            -2
        } else {
            let shell = (2..=i + j).map(|q| old[q - 1]).min().unwrap_or(i32::MAX);
            old[i - 1]
                .min(old[i - 1] - j as i32)
                .min(old[j - 1] - i as i32)
                .min(shell)
        };
    }
}
