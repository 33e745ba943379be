//! Periodic-grid evaluation of densities and a pseudo-spectral HD integrator.

use std::sync::Arc;

use num_traits::ToPrimitive;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::algebra::DiffPoly;
use crate::hdcore::{hd_classical_match, solve_riccati_hd};
use crate::rings::{hd_alphabet, U};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("grid needs at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error("field has a non-finite value at node {0}")]
    NonFinite(usize),
    #[error("u = {value} at node {node}, but the density needs u > 0")]
    DomainError { node: usize, value: f64 },
    #[error("density uses generator {0}; only u is supported on the grid")]
    UnsupportedGenerator(String),
    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },
    #[error("invalid time step {0}")]
    InvalidStep(f64),
}

/// Samples of a function on `[0, 2π)` at `x_i = 2π i / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Result<Self, NumericError> {
        if values.len() < 8 {
            return Err(NumericError::GridTooSmall(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite(i));
        }
        Ok(GridField { values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Self, NumericError> {
        let dx = std::f64::consts::TAU / n as f64;
        Self::new((0..n).map(|i| f(i as f64 * dx)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        std::f64::consts::TAU / self.n() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Periodic trapezoid rule, `2π` times the mean.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiffBackend {
    #[default]
    Spectral,
    /// Central fourth-order differences, applied repeatedly for higher orders.
    FiniteDifference,
}

/// Signed wavenumber of FFT bin `i` on an `n`-point grid; the Nyquist bin maps to 0
/// for odd derivatives.
fn wavenumber(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else if i == n / 2 && n.is_multiple_of(2) {
        0.0
    } else {
        i as f64 - n as f64
    }
}

struct Plans {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let scale = 1.0 / self.n as f64;
        spec.into_iter().map(|c| c.re * scale).collect()
    }
}

fn spectral_multiply(spec: &mut [Complex64], order: u32) {
    let n = spec.len();
    for (i, c) in spec.iter_mut().enumerate() {
        let mut k = wavenumber(i, n);
        if order.is_multiple_of(2) && i == n / 2 && n.is_multiple_of(2) {
            k = -(n as f64) / 2.0;
        }
        *c *= Complex64::new(0.0, k).powu(order);
    }
}

/// Derivative of the given order via the discrete Fourier transform.
pub fn spectral_diff(f: &GridField, order: u32) -> GridField {
    if order == 0 {
        return f.clone();
    }
    let plans = Plans::new(f.n());
    let mut spec = plans.forward(&f.values);
    spectral_multiply(&mut spec, order);
    GridField {
        values: plans.inverse(spec),
    }
}

/// Derivative of the given order by repeated fourth-order central differences.
pub fn fd_diff(f: &GridField, order: u32) -> GridField {
    let n = f.n();
    let h = f.dx();
    let mut v = f.values.clone();
    for _ in 0..order {
        v = (0..n)
            .map(|i| {
                let at = |o: isize| v[(i as isize + o).rem_euclid(n as isize) as usize];
                (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
            })
            .collect();
    }
    GridField { values: v }
}

pub fn diff(f: &GridField, order: u32, backend: DiffBackend) -> GridField {
    match backend {
        DiffBackend::Spectral => spectral_diff(f, order),
        DiffBackend::FiniteDifference => fd_diff(f, order),
    }
}

/// A density in `u` and its jets, lowered to floating-point monomials.
#[derive(Clone, Debug)]
pub struct CompiledDensity {
    source: DiffPoly,
    max_order: u16,
    /// `(coefficient, [(jet order, exponent)])`.
    terms: Vec<(f64, Vec<(u16, f64)>)>,
    /// A fractional or negative power of `u` occurs.
    needs_positive: bool,
}

impl CompiledDensity {
    pub fn compile(source: &DiffPoly) -> Result<Self, NumericError> {
        let mut terms = Vec::new();
        let mut max_order = 0;
        let mut needs_positive = false;
        for (mono, c) in source.terms() {
            let mut factors = Vec::new();
            for (v, e) in mono.factors() {
                if v.gen != U {
                    return Err(NumericError::UnsupportedGenerator(
                        hd_alphabet().spec(v.gen).name.clone(),
                    ));
                }
                max_order = max_order.max(v.order);
                if !e.is_integer() || e.halves() < 0 {
                    needs_positive = true;
                }
                factors.push((v.order, e.to_f64()));
            }
            terms.push((c.to_f64().unwrap_or(f64::NAN), factors));
        }
        Ok(CompiledDensity {
            source: source.clone(),
            max_order,
            terms,
            needs_positive,
        })
    }

    pub fn source(&self) -> &DiffPoly {
        &self.source
    }

    pub fn max_order(&self) -> u16 {
        self.max_order
    }

    /// Pointwise values of the density on the grid of `u`.
    pub fn eval_nodes(&self, u: &GridField, backend: DiffBackend) -> Result<Vec<f64>, NumericError> {
        if self.needs_positive {
            if let Some((node, &value)) = u.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(NumericError::DomainError { node, value });
            }
        }
        let jets: Vec<GridField> = (0..=self.max_order)
            .map(|o| diff(u, o as u32, backend))
            .collect();
        Ok((0..u.n())
            .map(|i| {
                self.terms
                    .iter()
                    .map(|(c, fs)| {
                        fs.iter().fold(*c, |acc, &(o, e)| {
                            let x = jets[o as usize].values[i];
                            acc * if e.fract() == 0.0 { x.powi(e as i32) } else { x.powf(e) }
                        })
                    })
                    .sum()
            })
            .collect())
    }
}

/// `∮ d(u) dx` by the periodic trapezoid rule.
pub fn functional_eval(
    d: &CompiledDensity,
    u: &GridField,
    backend: DiffBackend,
) -> Result<f64, NumericError> {
    let vals = d.eval_nodes(u, backend)?;
    Ok(vals.iter().sum::<f64>() * u.dx())
}

/// A named monitored functional.
#[derive(Clone, Debug)]
pub struct Monitor {
    pub name: String,
    pub density: CompiledDensity,
}

/// `∮u^(1/2)`, `∮2k_1`, ... through `∮2k_{2 count - 1}`.
pub fn standard_monitors(count: usize) -> Result<Vec<Monitor>, NumericError> {
    let half = DiffPoly::parse("u^(1/2)", hd_alphabet()).expect("valid literal");
    let mut out = vec![Monitor {
        name: "u^(1/2)".into(),
        density: CompiledDensity::compile(&half)?,
    }];
    if count > 1 {
        let k = solve_riccati_hd(2 * count - 3);
        for j in 1..count {
            let l = 2 * j as i32 - 1;
            out.push(Monitor {
                name: format!("2k{l}"),
                density: CompiledDensity::compile(&k.coefficient(l).scale(&crate::algebra::rat(2, 1)))?,
            });
        }
    }
    Ok(out)
}

/// `dt = 0.25 u_min^(3/2) Δx^3`; the linearized operator `(1/4) u^(-3/2) ∂^3`
/// and the fourth-order Runge-Kutta stability interval on the imaginary axis
/// allow about `0.36`.
pub fn stable_dt(u: &GridField) -> f64 {
    0.25 * u.min().max(0.0).powf(1.5) * u.dx().powi(3)
}

/// Right-hand side `coeff * ((offset + v)^(-1/2))_xxx` with the power evaluated on a
/// 3/2 zero-padded grid and the result restricted to the lower two thirds of the spectrum.
struct HdOperator {
    small: Plans,
    padded: Plans,
    coeff: f64,
    offset: f64,
}

impl HdOperator {
    fn new(n: usize, coeff: f64, offset: f64) -> Self {
        let m = (3 * n).div_ceil(2);
        HdOperator {
            small: Plans::new(n),
            padded: Plans::new(m + m % 2),
            coeff,
            offset,
        }
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>, NumericError> {
        let n = self.small.n;
        let m = self.padded.n;
        let spec = self.small.forward(v);
        let cut = n / 3;
        let mut big = vec![Complex64::new(0.0, 0.0); m];
        for (i, c) in spec.iter().enumerate() {
            let k = wavenumber(i, n);
            if k.abs() as usize <= cut && !(i == n / 2 && n.is_multiple_of(2)) {
                let j = if k >= 0.0 { k as usize } else { (m as f64 + k) as usize };
                big[j] = *c * (m as f64 / n as f64);
            }
        }
        let fine = self.padded.inverse(big);
        let mut g = Vec::with_capacity(m);
        for (node, &x) in fine.iter().enumerate() {
            let w = self.offset + x;
            if !(w > 0.0) {
                return Err(NumericError::DomainError {
                    node: node * n / m,
                    value: w,
                });
            }
            g.push(w.powf(-0.5));
        }
        let gs = self.padded.forward(&g);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in gs.iter().enumerate() {
            let k = wavenumber(i, m);
            if k.abs() as usize <= cut && k.abs() > 0.0 {
                let j = if k >= 0.0 { k as usize } else { (n as f64 + k) as usize };
                out[j] = *c * (n as f64 / m as f64) * Complex64::new(0.0, k).powu(3) * self.coeff;
            }
        }
        Ok(self.small.inverse(out))
    }
}

fn rk4<F>(y: &[f64], h: f64, f: &F) -> Result<Vec<f64>, NumericError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, NumericError>,
{
    let axpy = |k: &[f64], a: f64| -> Vec<f64> { y.iter().zip(k).map(|(p, q)| p + a * q).collect() };
    let k1 = f(y)?;
    let k2 = f(&axpy(&k1, 0.5 * h))?;
    let k3 = f(&axpy(&k2, 0.5 * h))?;
    let k4 = f(&axpy(&k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimSample {
    pub step: usize,
    pub t: f64,
    pub values: Vec<f64>,
    pub drifts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub monitors: Vec<String>,
    pub samples: Vec<SimSample>,
    /// Maximum relative deviation of each monitor from its initial value.
    pub drift: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub final_u: GridField,
}

impl SimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t");
        for m in &self.monitors {
            out.push_str(&format!(",{m}"));
        }
        for m in &self.monitors {
            out.push_str(&format!(",drift_{m}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{},{:e}", s.step, s.t));
            for v in s.values.iter().chain(&s.drifts) {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Integrates `u_t = -(1/2) (u^(-1/2))_xxx` with classical Runge-Kutta steps,
/// sampling the monitors every `sample_every` steps and at the end.
pub fn simulate_hd(
    u0: &GridField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
    sample_every: usize,
) -> Result<SimReport, NumericError> {
    let op = HdOperator::new(u0.n(), -0.5, 0.0);
    run(u0, dt, steps, monitors, sample_every, |v| op.apply(v), |v| v.clone())
}

fn run<F, G>(
    y0: &GridField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
    sample_every: usize,
    rhs: F,
    to_u: G,
) -> Result<SimReport, NumericError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, NumericError>,
    G: Fn(&GridField) -> GridField,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(NumericError::InvalidStep(dt));
    }
    let every = sample_every.max(1);
    let measure = |y: &GridField| -> Result<Vec<f64>, NumericError> {
        let u = to_u(y);
        monitors
            .iter()
            .map(|m| functional_eval(&m.density, &u, DiffBackend::Spectral))
            .collect()
    };
    let initial = measure(y0)?;
    let rel = |vals: &[f64]| -> Vec<f64> {
        vals.iter()
            .zip(&initial)
            .map(|(v, i)| (v - i).abs() / i.abs().max(f64::MIN_POSITIVE))
            .collect()
    };
    let mut samples = vec![SimSample {
        step: 0,
        t: 0.0,
        values: initial.clone(),
        drifts: vec![0.0; monitors.len()],
    }];
    let mut y = y0.values.clone();
    for s in 1..=steps {
        y = rk4(&y, dt, &rhs)?;
        let t = dt * s as f64;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { step: s, t });
        }
        if s % every == 0 || s == steps {
            let field = GridField { values: y.clone() };
            let values = measure(&field)?;
            let drifts = rel(&values);
            samples.push(SimSample { step: s, t, values, drifts });
        }
    }
    let drift = (0..monitors.len())
        .map(|m| samples.iter().map(|s| s.drifts[m]).fold(0.0, f64::max))
        .collect();
    Ok(SimReport {
        monitors: monitors.iter().map(|m| m.name.clone()).collect(),
        samples,
        drift,
        dt,
        steps,
        final_u: to_u(&GridField { values: y }),
    })
}

/// Evolves `q = u - 1` by `q_t = 2c ((1 + q)^(-1/2))_xxx`, with `c` the ratio between
/// the HD vector field and the classical equation, and reports `u = 1 + q`.
pub fn simulate_q_form(
    u0: &GridField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
    sample_every: usize,
) -> Result<SimReport, NumericError> {
    let c = hd_classical_match()
        .ok()
        .and_then(|c| c.to_f64())
        .expect("the classical constant is a finite rational");
    let op = HdOperator::new(u0.n(), 2.0 * c, 1.0);
    let q0 = GridField {
        values: u0.values.iter().map(|v| v - 1.0).collect(),
    };
    let shift = |q: &GridField| GridField {
        values: q.values.iter().map(|v| v + 1.0).collect(),
    };
    run(&q0, dt, steps, monitors, sample_every, |v| op.apply(v), shift)
}

/// Final-time drift of each monitor for `dt, dt/2, dt/4, ...` over the same interval.
pub fn drift_refinement(
    u0: &GridField,
    t_end: f64,
    dt0: f64,
    levels: usize,
    monitors: &[Monitor],
) -> Result<Vec<(f64, Vec<f64>)>, NumericError> {
    let mut out = Vec::new();
    let base_steps = (t_end / dt0).ceil().max(1.0) as usize;
    for lvl in 0..levels {
        let steps = base_steps << lvl;
        let dt = t_end / steps as f64;
        let r = simulate_hd(u0, dt, steps, monitors, steps)?;
        out.push((dt, r.drift));
    }
    Ok(out)
}

/// Relative drift below which the monitors are at double-precision roundoff;
/// differences under this level carry no information about the time step.
pub const DRIFT_ROUNDOFF_FLOOR: f64 = 1e-12;

/// `ds[i + 1] <= max(ds[i], floor)` for every consecutive pair.
pub fn monotone_within_floor(ds: &[f64], floor: f64) -> bool {
    ds.windows(2).all(|w| w[1] <= w[0].max(floor))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRun {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// Relative drift per monitor.
    pub drift: Vec<f64>,
}

/// Conservation checks for `u0 = 1 + 0.1 sin x` on 128 points up to `t = 0.01`,
/// plus two refinement studies on coarser data where the discretization error
/// rises above roundoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationStudy {
    pub monitors: Vec<String>,
    /// Stability-rule step and its halvings.
    pub halving: Vec<DriftRun>,
    /// `u0 = 1 + 0.3 sin x + 0.1 cos 2x`, 32 points, `t = 2`, halving `dt`.
    pub coarse_halving: Vec<DriftRun>,
    /// Same data, `t = 0.5`, common `dt`, `n = 16, 32, 64`.
    pub spatial: Vec<DriftRun>,
}

fn drift_runs(
    u0: &GridField,
    t_end: f64,
    dt0: f64,
    levels: usize,
    monitors: &[Monitor],
) -> Result<Vec<DriftRun>, NumericError> {
    Ok(drift_refinement(u0, t_end, dt0, levels, monitors)?
        .into_iter()
        .map(|(dt, drift)| DriftRun {
            n: u0.n(),
            dt,
            steps: (t_end / dt).round() as usize,
            drift,
        })
        .collect())
}

pub fn conservation_study() -> Result<ConservationStudy, NumericError> {
    let monitors = standard_monitors(3)?;
    let u0 = GridField::from_fn(128, |x| 1.0 + 0.1 * x.sin())?;
    let halving = drift_runs(&u0, 1e-2, stable_dt(&u0), 3, &monitors)?;
    let profile = |x: f64| 1.0 + 0.3 * x.sin() + 0.1 * (2.0 * x).cos();
    let coarse = GridField::from_fn(32, profile)?;
    let coarse_halving = drift_runs(&coarse, 2.0, 1.4 * stable_dt(&coarse), 3, &monitors)?;
    let dt = 1.4 * stable_dt(&GridField::from_fn(64, profile)?);
    let mut spatial = Vec::new();
    for n in [16, 32, 64] {
        spatial.extend(drift_runs(&GridField::from_fn(n, profile)?, 0.5, dt, 1, &monitors)?);
    }
    Ok(ConservationStudy {
        monitors: monitors.into_iter().map(|m| m.name).collect(),
        halving,
        coarse_halving,
        spatial,
    })
}

impl ConservationStudy {
    fn column(runs: &[DriftRun], m: usize) -> Vec<f64> {
        runs.iter().map(|r| r.drift[m]).collect()
    }

    /// Largest drift of monitor `m` over the stability-rule runs.
    pub fn pinned_drift(&self, m: usize) -> f64 {
        self.halving[0].drift[m]
    }

    pub fn halving_monotone(&self, m: usize) -> bool {
        monotone_within_floor(&Self::column(&self.halving, m), DRIFT_ROUNDOFF_FLOOR)
    }

    /// The coarse study must show a strict decrease above the floor.
    pub fn coarse_monotone(&self, m: usize) -> bool {
        let c = Self::column(&self.coarse_halving, m);
        monotone_within_floor(&c, DRIFT_ROUNDOFF_FLOOR) && c[0] > c[1]
    }

    pub fn spatial_monotone(&self, m: usize) -> bool {
        let c = Self::column(&self.spatial, m);
        monotone_within_floor(&c, DRIFT_ROUNDOFF_FLOOR) && c[0] > c[c.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn p(s: &str) -> DiffPoly {
        DiffPoly::parse(s, hd_alphabet()).unwrap()
    }

    fn wave(n: usize) -> GridField {
        GridField::from_fn(n, |x| 1.0 + 0.1 * x.sin()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert_eq!(GridField::new(vec![1.0; 4]), Err(NumericError::GridTooSmall(4)));
        assert_eq!(GridField::new(vec![f64::NAN; 8]), Err(NumericError::NonFinite(0)));
    }

    #[test]
    fn spectral_examples() {
        let s = GridField::from_fn(32, f64::sin).unwrap();
        let c = GridField::from_fn(32, f64::cos).unwrap();
        assert!(spectral_diff(&s, 1).max_abs_diff(&c) < 1e-13);
        let k = GridField::new(vec![3.0; 16]).unwrap();
        assert!(spectral_diff(&k, 2).values().iter().all(|v| v.abs() < 1e-13));
        let s3 = GridField::from_fn(32, |x| (3.0 * x).sin()).unwrap();
        let e = GridField::from_fn(32, |x| -9.0 * (3.0 * x).sin()).unwrap();
        assert!(spectral_diff(&s3, 2).max_abs_diff(&e) < 1e-12);
    }

    #[test]
    fn finite_differences_are_fourth_order() {
        let err = |n| {
            let f = GridField::from_fn(n, |x| (x.sin()).exp()).unwrap();
            fd_diff(&f, 1).max_abs_diff(&spectral_diff(&f, 1))
        };
        let ratio = err(64) / err(128);
        assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn functional_examples() {
        let four = GridField::new(vec![4.0; 16]).unwrap();
        let d = CompiledDensity::compile(&p("u^(1/2)")).unwrap();
        assert!((functional_eval(&d, &four, DiffBackend::Spectral).unwrap() - 4.0 * PI).abs() < 1e-12);
        let dx = CompiledDensity::compile(&p("u1")).unwrap();
        assert!(functional_eval(&dx, &wave(64), DiffBackend::Spectral).unwrap().abs() < 1e-14);
        let neg = GridField::from_fn(16, |x| x.sin()).unwrap();
        assert!(matches!(
            functional_eval(&d, &neg, DiffBackend::Spectral),
            Err(NumericError::DomainError { .. })
        ));
        assert!(CompiledDensity::compile(&p("v")).is_err());
    }

    #[test]
    fn k1_functional_backends_agree() {
        let d = &standard_monitors(2).unwrap()[1].density;
        let u = wave(512);
        let s = functional_eval(d, &u, DiffBackend::Spectral).unwrap();
        let f = functional_eval(d, &u, DiffBackend::FiniteDifference).unwrap();
        assert!(s.is_finite() && s != 0.0);
        assert!(((s - f) / s).abs() < 1e-8, "{s} vs {f}");
    }

    #[test]
    fn constant_is_stationary() {
        let u = GridField::new(vec![1.0; 32]).unwrap();
        let mons = standard_monitors(3).unwrap();
        let r = simulate_hd(&u, 1e-3, 20, &mons, 5).unwrap();
        assert!(r.final_u.max_abs_diff(&u) < 1e-14);
        assert!(r.drift.iter().all(|d| *d < 1e-14));
        assert_eq!(r.samples.len(), 5);
    }

    #[test]
    fn q_form_matches() {
        let u = wave(64);
        let dt = stable_dt(&u);
        let a = simulate_hd(&u, dt, 200, &[], 200).unwrap();
        let b = simulate_q_form(&u, dt, 200, &[], 200).unwrap();
        assert!(a.final_u.max_abs_diff(&b.final_u) < 1e-12);
        assert!(a.final_u.max_abs_diff(&u) > 1e-6);
    }

    #[test]
    fn time_self_convergence() {
        let u = GridField::from_fn(32, |x| 1.0 + 0.2 * x.sin() + 0.05 * (2.0 * x).cos()).unwrap();
        let t = 0.3;
        let dt0 = stable_dt(&u);
        let run = |k: usize| {
            let steps = ((t / dt0).ceil() as usize) << k;
            simulate_hd(&u, t / steps as f64, steps, &[], steps).unwrap().final_u
        };
        let (a, b, c) = (run(0), run(1), run(2));
        let ratio = a.max_abs_diff(&b) / b.max_abs_diff(&c);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn positivity_enforced() {
        let u = GridField::from_fn(16, |x| 0.5 + x.sin()).unwrap();
        assert!(matches!(
            simulate_hd(&u, 1e-4, 1, &[], 1),
            Err(NumericError::DomainError { .. })
        ));
    }

    #[test]
    fn monotone_floor() {
        assert!(monotone_within_floor(&[1e-3, 1e-5, 1e-13, 5e-13], DRIFT_ROUNDOFF_FLOOR));
        assert!(!monotone_within_floor(&[1e-5, 1e-4], DRIFT_ROUNDOFF_FLOOR));
    }
}
