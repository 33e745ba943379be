//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Each export returns a JSON string; the page does its own drawing. The
//! plain functions behind the exports are ordinary Rust and are tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dymforge::central::{cs_integrate, riccati_family, CSState, FlowSpec};
use dymforge::hdcore::{lenard_ladder, solve_riccati_hd};
use dymforge::numeric::{simulate_hd, stable_dt, standard_monitors, GridField};
use dymforge::rings::hd_alphabet;

/// Largest ladder order the page may request; rendering past it gets slow in the browser.
pub const MAX_ORDER: usize = 6;
/// Jet values of `k_m1` at the sample point used for the Central System state.
const SAMPLE_JET: [f64; 8] = [1.1, 0.2, -0.3, 0.15, 0.4, -0.25, 0.1, 0.05];

#[derive(Serialize)]
struct Entry {
    name: String,
    text: String,
    latex: String,
}

#[derive(Serialize)]
pub struct Hierarchy {
    coefficients: Vec<Entry>,
    fields: Vec<Entry>,
}

pub fn hierarchy(order: usize) -> Result<Hierarchy, String> {
    if order > MAX_ORDER {
        return Err(format!("order {order} exceeds {MAX_ORDER}"));
    }
    let a = hd_alphabet();
    let top = 2 * order as i32 - 1;
    let k = solve_riccati_hd(top.max(0) as usize);
    let ladder = lenard_ladder(order).map_err(|e| e.to_string())?;
    let entry = |name: String, p: &dymforge::algebra::DiffPoly| Entry {
        name,
        text: p.to_text(a),
        latex: p.to_latex(a),
    };
    Ok(Hierarchy {
        coefficients: (-1..=top).map(|j| entry(format!("k_{j}"), &k.coefficient(j))).collect(),
        fields: ladder.fields.iter().enumerate().map(|(j, x)| entry(format!("X_{j}"), x)).collect(),
    })
}

#[derive(Serialize)]
pub struct Simulation {
    pub x: Vec<f64>,
    pub u0: Vec<f64>,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    pub monitors: Vec<String>,
    /// `drift[m][s]`: relative drift of monitor `m` at sample `s`.
    pub drift: Vec<Vec<f64>>,
    pub dt: f64,
}

/// `u0 = 1 + amplitude sin x` on `n` points, run to `t_end` at the stability-rule step.
pub fn simulation(n: usize, amplitude: f64, t_end: f64) -> Result<Simulation, String> {
    if !(amplitude.abs() < 1.0) || !(t_end > 0.0) {
        return Err("need |amplitude| < 1 and t_end > 0".into());
    }
    let u0 = GridField::from_fn(n, |x| 1.0 + amplitude * x.sin()).map_err(|e| e.to_string())?;
    let steps = (t_end / stable_dt(&u0)).ceil().max(1.0) as usize;
    let monitors = standard_monitors(3).map_err(|e| e.to_string())?;
    let r = simulate_hd(&u0, t_end / steps as f64, steps, &monitors, (steps / 100).max(1))
        .map_err(|e| e.to_string())?;
    Ok(Simulation {
        x: (0..n).map(|i| u0.node(i)).collect(),
        u0: u0.values().to_vec(),
        u: r.final_u.values().to_vec(),
        t: r.samples.iter().map(|s| s.t).collect(),
        drift: (0..monitors.len()).map(|m| r.samples.iter().map(|s| s.drifts[m]).collect()).collect(),
        monitors: r.monitors,
        dt: r.dt,
    })
}

#[derive(Serialize)]
pub struct CentralFlow {
    pub labels: Vec<String>,
    pub t: Vec<f64>,
    /// `values[c][s]`: coefficient `c` at snapshot `s`.
    pub values: Vec<Vec<f64>>,
    pub closure: Vec<f64>,
}

/// Integrates the `t_flow` flow of the Central System from a Riccati-locus state.
pub fn central_flow(family: usize, depth: usize, flow: usize, duration: f64) -> Result<CentralFlow, String> {
    if flow == 0 || flow >= family {
        return Err(format!("flow t_{flow} needs 1 <= j < {family}"));
    }
    let fam = riccati_family(family, depth, &SAMPLE_JET).map_err(|e| e.to_string())?;
    let state = CSState::new(&fam).map_err(|e| e.to_string())?;
    let step = (duration / 200.0).clamp(1e-4, 1e-2);
    let tr = cs_integrate(state, &[FlowSpec { time: flow, duration, step }]).map_err(|e| e.to_string())?;
    let width = tr.labels.len();
    Ok(CentralFlow {
        t: tr.snapshots.iter().map(|s| s.t).collect(),
        values: (0..width).map(|c| tr.snapshots.iter().map(|s| s.values[c]).collect()).collect(),
        closure: tr.snapshots.iter().map(|s| s.closure_residual).collect(),
        labels: tr.labels,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("plain data")).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = renderHierarchy)]
pub fn render_hierarchy(order: usize) -> Result<String, JsError> {
    to_js(hierarchy(order))
}

#[wasm_bindgen(js_name = simulateHd)]
pub fn simulate_hd_curves(n: usize, amplitude: f64, t_end: f64) -> Result<String, JsError> {
    to_js(simulation(n, amplitude, t_end))
}

#[wasm_bindgen(js_name = centralFlow)]
pub fn central_flow_js(family: usize, depth: usize, flow: usize, duration: f64) -> Result<String, JsError> {
    to_js(central_flow(family, depth, flow, duration))
}
