//! Output of the compute commands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use dymforge::algebra::{Alphabet, DiffPoly};
use dymforge::central::{cs_integrate, cs_rhs_projection, riccati_family, CSState, CurrentFamily, FlowSpec};
use dymforge::hdcore::{lenard_ladder, solve_riccati_hd, Series};
use dymforge::hdkp::{constrained_k, current_in, free_k, trivial_k, FdbBasis};
use dymforge::laurent::LaurentSeries;
use dymforge::numeric::{simulate_hd, simulate_q_form, stable_dt, standard_monitors, GridField};
use dymforge::rings::{hd_alphabet, k_gen, CentralAlphabet};

use crate::config::{CentralInit, CurrentMode, Format, Resolved, RunConfig, SimForm};
use crate::CliError;

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn latex_block(lines: &[(String, String)]) -> String {
    let mut s = String::from("\\begin{aligned}\n");
    for (i, (lhs, rhs)) in lines.iter().enumerate() {
        let end = if i + 1 < lines.len() { " \\\\" } else { "" };
        s.push_str(&format!("{lhs} &= {rhs}{end}\n"));
    }
    s.push_str("\\end{aligned}\n");
    s
}

fn k_name(j: i32) -> String {
    hd_alphabet().spec(k_gen(j)).name.clone()
}

fn k_latex(j: i32) -> String {
    format!("k_{{{j}}}")
}

/// Riccati coefficients `k_{-1}..k_{2N-1}` and the ladder `j = 0..N`.
pub fn hierarchy(order: usize, format: Format) -> Result<String, CliError> {
    let top = 2 * order as i32 - 1;
    let riccati = solve_riccati_hd(top.max(0) as usize);
    let series = riccati.k.truncate(-top).map_err(runtime)?;
    let ladder = lenard_ladder(order).map_err(runtime)?;
    let a = hd_alphabet();
    let coeffs: Vec<(i32, DiffPoly)> = (-1..=top).map(|j| (j, riccati.coefficient(j))).collect();
    Ok(match format {
        Format::Text => {
            let mut s = format!("# Riccati coefficients k_j, j = -1..{top}\n");
            for (j, c) in &coeffs {
                s.push_str(&format!("{} = {}\n", k_name(*j), c.to_text(a)));
            }
            s.push_str(&format!("# ladder j = 0..{order}: density h_j = 2 k_(2j-1), gradient w_j, field X_j = P0 w_j\n"));
            for j in 0..=order {
                s.push_str(&format!("h{j} = {}\n", ladder.densities[j].to_text(a)));
                s.push_str(&format!("w{j} = {}\n", ladder.gradients[j].to_text(a)));
                s.push_str(&format!("X{j} = {}\n", ladder.fields[j].to_text(a)));
            }
            s
        }
        Format::Latex => {
            let mut lines: Vec<(String, String)> =
                coeffs.iter().map(|(j, c)| (k_latex(*j), c.to_latex(a))).collect();
            for j in 0..=order {
                lines.push((format!("h_{{{j}}}"), ladder.densities[j].to_latex(a)));
                lines.push((format!("w_{{{j}}}"), ladder.gradients[j].to_latex(a)));
                lines.push((format!("X_{{{j}}}"), ladder.fields[j].to_latex(a)));
            }
            latex_block(&lines)
        }
        Format::Json => {
            let ks: Vec<Value> = coeffs
                .iter()
                .map(|(j, c)| json!({"index": j, "name": k_name(*j), "text": c.to_text(a), "latex": c.to_latex(a)}))
                .collect();
            let lad: Vec<Value> = (0..=order)
                .map(|j| {
                    json!({
                        "j": j,
                        "density": ladder.densities[j].to_text(a),
                        "gradient": ladder.gradients[j].to_text(a),
                        "field": ladder.fields[j].to_text(a),
                    })
                })
                .collect();
            let v = json!({"order": order, "coefficients": ks, "series": series.to_json_value(a), "ladder": lad});
            serde_json::to_string_pretty(&v).expect("plain json") + "\n"
        }
        Format::Csv => unreachable!("rejected by validation"),
    })
}

fn combo_text(combo: &[DiffPoly], a: &Alphabet, latex: bool) -> String {
    let mut parts = Vec::new();
    for (idx, c) in combo.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let j = idx + 2;
        let body = if latex { c.to_latex(a) } else { c.to_text(a) };
        let body = if c.len() > 1 { format!("({body})") } else { body };
        parts.push(if latex {
            format!("{body} k^{{({j})}}")
        } else {
            format!("{body}*k^({j})")
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn series_latex(s: &Series, a: &Alphabet) -> String {
    let mut parts: Vec<String> = s
        .terms()
        .map(|(d, c)| {
            let body = c.to_latex(a);
            let body = if c.len() > 1 { format!("\\left({body}\\right)") } else { body };
            let body = if d != 0 && body == "1" { String::new() } else { body + " " };
            match d {
                0 => body.trim_end().to_string(),
                1 => format!("{body}z"),
                d => format!("{body}z^{{{d}}}"),
            }
        })
        .collect();
    if parts.is_empty() {
        parts.push("0".into());
    }
    let mut out = parts.join(" + ");
    if let Some(f) = s.floor() {
        out.push_str(&format!(" + O(z^{{{}}})", f - 1));
    }
    out
}

/// Currents `K^(2)..K^(lmax)` known down to `z^-depth`.
pub fn currents(lmax: usize, depth: usize, mode: CurrentMode, format: Format) -> Result<String, CliError> {
    let k_depth = depth + lmax - 1;
    let k = match mode {
        CurrentMode::Free => free_k(k_depth),
        CurrentMode::Constrained => constrained_k(k_depth).map_err(runtime)?,
        CurrentMode::Trivial => trivial_k(),
    };
    let mut basis = FdbBasis::new(k).map_err(runtime)?;
    let a = hd_alphabet();
    let mut rows = Vec::new();
    for l in 2..=lmax {
        let c = current_in(&mut basis, l).map_err(runtime)?;
        let s = if c.series.is_exact() || c.series.floor() < Some(-(depth as i32)) {
            c.series.truncate(-(depth as i32)).map_err(runtime)?
        } else {
            c.series
        };
        rows.push((l, c.combo, s));
    }
    Ok(match format {
        Format::Text => {
            let mut out = String::new();
            for (l, combo, s) in &rows {
                out.push_str(&format!("K^({l}) = {}\n", combo_text(combo, a, false)));
                out.push_str(&format!("K^({l}) = {}\n", s.to_text(a)));
            }
            out
        }
        Format::Latex => {
            let mut lines = Vec::new();
            for (l, combo, s) in &rows {
                lines.push((format!("K^{{({l})}}"), combo_text(combo, a, true)));
                lines.push((String::new(), series_latex(s, a)));
            }
            latex_block(&lines)
        }
        Format::Json => {
            let cs: Vec<Value> = rows
                .iter()
                .map(|(l, combo, s)| {
                    let combo: Vec<Value> = combo
                        .iter()
                        .enumerate()
                        .map(|(i, c)| json!({"j": i + 2, "coeff": c.to_text(a)}))
                        .collect();
                    json!({"index": l, "combo": combo, "series": s.to_json_value(a)})
                })
                .collect();
            let v = json!({"mode": mode.to_string(), "depth": depth, "currents": cs});
            serde_json::to_string_pretty(&v).expect("plain json") + "\n"
        }
        Format::Csv => unreachable!("rejected by validation"),
    })
}

/// `∂K^(i)/∂t_j` for the free family.
pub fn central_symbolic(m: usize, depth: usize, flow: usize, format: Format) -> Result<String, CliError> {
    let alphabet = CentralAlphabet::new(m, depth);
    let fam = CurrentFamily::free(&alphabet);
    let a = alphabet.alphabet();
    let mut rows = Vec::new();
    for i in 1..=m - flow {
        match cs_rhs_projection(i, flow, &fam) {
            Ok(d) => rows.push((i, Some(d))),
            Err(dymforge::central::CentralError::Laurent(_)) => rows.push((i, None)),
            Err(e) => return Err(runtime(e)),
        }
    }
    Ok(match format {
        Format::Text => {
            let mut out = String::new();
            for (i, d) in &rows {
                let body = d.as_ref().map_or("(no coefficient inside the truncation window)".into(), |d| d.to_text(a));
                out.push_str(&format!("dK^({i})/dt_{flow} = {body}\n"));
            }
            out
        }
        Format::Latex => {
            let lines: Vec<(String, String)> = rows
                .iter()
                .filter_map(|(i, d)| {
                    d.as_ref().map(|d| (format!("\\partial_{{t_{{{flow}}}}} K^{{({i})}}"), series_latex(d, a)))
                })
                .collect();
            latex_block(&lines)
        }
        Format::Json => {
            let rs: Vec<Value> = rows
                .iter()
                .map(|(i, d)| json!({"current": i, "derivative": d.as_ref().map(|d| d.to_json_value(a))}))
                .collect();
            let v = json!({"family": m, "depth": depth, "flow": flow, "rhs": rs});
            serde_json::to_string_pretty(&v).expect("plain json") + "\n"
        }
        Format::Csv => unreachable!("rejected by validation"),
    })
}

/// Jet values of `k_m1` used for the Riccati initial state.
const SAMPLE_JET: [f64; 8] = [1.1, 0.2, -0.3, 0.15, 0.4, -0.25, 0.1, 0.05];

pub fn initial_family(
    m: usize,
    depth: usize,
    init: CentralInit,
    seed: u64,
) -> Result<CurrentFamily<f64>, CliError> {
    Ok(match init {
        CentralInit::Trivial => CurrentFamily::trivial(m, depth),
        CentralInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CurrentFamily::from_coefficients(m, depth, |i, l| {
                let base = if i == 1 && l == -1 { 1.0 } else { 0.0 };
                base + rng.gen_range(-0.2..0.2)
            })
        }
        CentralInit::Riccati => riccati_family(m, depth, &SAMPLE_JET).map_err(runtime)?,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn central_numeric(
    m: usize,
    depth: usize,
    flow: usize,
    duration: f64,
    step: f64,
    init: CentralInit,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    let fam = initial_family(m, depth, init, seed)?;
    let state = CSState::new(&fam).map_err(runtime)?;
    let tr = cs_integrate(state, &[FlowSpec { time: flow, duration, step }]).map_err(runtime)?;
    Ok(match format {
        Format::Csv => tr.to_csv(),
        Format::Json => tr.to_json() + "\n",
        Format::Text => {
            let last = tr.snapshots.last().expect("initial snapshot");
            let mut s = format!(
                "flow t_{flow}: {} steps to t = {}\nclosure residual {:e}\n",
                tr.snapshots.len() - 1,
                last.t,
                last.closure_residual
            );
            for (i, v) in tr.final_state.valid.iter().enumerate() {
                s.push_str(&format!("K^({}) valid through l = {v}\n", i + 1));
            }
            s
        }
        Format::Latex => unreachable!("rejected by validation"),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    n: usize,
    dt: Option<f64>,
    steps: Option<usize>,
    t_end: f64,
    amplitude: f64,
    monitors: usize,
    sample_every: Option<usize>,
    form: SimForm,
    format: Format,
) -> Result<String, CliError> {
    let u0 = GridField::from_fn(n, |x| 1.0 + amplitude * x.sin()).map_err(runtime)?;
    let mons = standard_monitors(monitors).map_err(runtime)?;
    let (dt, steps) = match (dt, steps) {
        (Some(dt), Some(s)) => (dt, s),
        (Some(dt), None) => {
            let s = (t_end / dt).ceil().max(1.0) as usize;
            (t_end / s as f64, s)
        }
        // a bare step count runs at the stability-rule step and ignores t_end
        (None, Some(s)) => (stable_dt(&u0), s),
        (None, None) => {
            let s = (t_end / stable_dt(&u0)).ceil().max(1.0) as usize;
            (t_end / s as f64, s)
        }
    };
    let every = sample_every.unwrap_or((steps / 50).max(1));
    let report = match form {
        SimForm::U => simulate_hd(&u0, dt, steps, &mons, every),
        SimForm::Q => simulate_q_form(&u0, dt, steps, &mons, every),
    }
    .map_err(runtime)?;
    Ok(match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
        Format::Text => {
            let mut s = format!("n = {n}, dt = {dt:e}, steps = {steps}, t = {:e}\n", dt * steps as f64);
            for (name, d) in report.monitors.iter().zip(&report.drift) {
                s.push_str(&format!("drift {name}: {d:e}\n"));
            }
            s
        }
        Format::Latex => unreachable!("rejected by validation"),
    })
}

/// Renders a non-verify command.
pub fn render(cfg: &RunConfig) -> Result<String, CliError> {
    match &cfg.command {
        Resolved::Hierarchy => hierarchy(cfg.order, cfg.format),
        Resolved::Currents { lmax, mode } => currents(*lmax, cfg.order, *mode, cfg.format),
        Resolved::Central { flow, numeric: false, .. } => {
            central_symbolic(cfg.family, cfg.order, *flow, cfg.format)
        }
        Resolved::Central { flow, numeric: true, duration, step, init } => {
            central_numeric(cfg.family, cfg.order, *flow, *duration, *step, *init, cfg.seed, cfg.format)
        }
        Resolved::Simulate { n, dt, steps, t_end, amplitude, monitors, sample_every, form } => simulate(
            *n,
            *dt,
            *steps,
            *t_end,
            *amplitude,
            *monitors,
            *sample_every,
            *form,
            cfg.format,
        ),
        Resolved::Verify { .. } => unreachable!("handled by the suite runner"),
    }
}

/// Cache file name for deterministic symbolic outputs; `None` for everything else.
pub fn cache_key(cfg: &RunConfig) -> Option<String> {
    let ext = match cfg.format {
        Format::Json => "json",
        Format::Latex => "tex",
        _ => "txt",
    };
    match &cfg.command {
        Resolved::Hierarchy => Some(format!("hierarchy-N{}.{ext}", cfg.order)),
        Resolved::Currents { lmax, mode } => Some(format!("currents-{mode}-L{lmax}-N{}.{ext}", cfg.order)),
        Resolved::Central { flow, numeric: false, .. } => {
            Some(format!("central-M{}-N{}-t{flow}.{ext}", cfg.family, cfg.order))
        }
        _ => None,
    }
}

/// The JSON series inside a `hierarchy` or `currents` output, parsed back.
pub fn parse_series(v: &Value) -> Option<LaurentSeries<DiffPoly>> {
    let sj = serde_json::from_value(v.clone()).ok()?;
    LaurentSeries::from_json_value(&sj, hd_alphabet()).ok()
}
