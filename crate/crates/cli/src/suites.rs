//! Named identity suites behind `dymforge verify`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use dymforge::algebra::{euler, is_total_derivative, rat, substitute, DiffPoly};
use dymforge::central::{
    cs_commute_residual, cs_rhs_explicit, cs_rhs_projection, spatialization_check, CurrentFamily,
};
use dymforge::hdcore::{
    casimir_equation_residual, casimir_residual, factorization_check, hd_classical_match,
    hd_vector_field, lenard_ladder, riccati_residual, rho_form_constant, solve_casimir_w,
    solve_riccati_hd, Series,
};
use dymforge::hdkp::{
    commute_check, conservation_sides, constrained_k, current, flow_in, free_k, trivial_k,
    u_to_k_bindings, FdbBasis,
};
use dymforge::laurent::LaurentSeries;
use dymforge::numeric::{conservation_study, DRIFT_ROUNDOFF_FLOOR};
use dymforge::rings::{hd_alphabet, k, u, CentralAlphabet, U};

use crate::config::Suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyParams {
    pub order: usize,
    pub family: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: usize,
    pub notes: Vec<String>,
    pub counterexample: Option<String>,
    pub seconds: f64,
}

struct Checker {
    checks: usize,
    notes: Vec<String>,
    failure: Option<String>,
}

impl Checker {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

type SuiteResult = Result<(), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn p(s: &str) -> DiffPoly {
    DiffPoly::parse(s, hd_alphabet()).expect("literal parses")
}

fn show(p: &DiffPoly) -> String {
    p.to_text(hd_alphabet())
}

fn riccati(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let n = v.order.max(1);
    let k = solve_riccati_hd(n);
    for (j, expect) in [
        (-1, "u^(1/2)"),
        (0, "-1/4*u1*u^(-1)"),
        (1, "-5/32*u1^2*u^(-5/2) + 1/8*u2*u^(-3/2)"),
    ] {
        let got = k.coefficient(j);
        c.check(got == p(expect), || format!("k_{j} = {}, expected {expect}", show(&got)));
    }
    let r = riccati_residual(&k.k, &u()).map_err(err)?;
    c.check(r.is_zero(), || format!("k_x + k^2 - u z^2 = {}", r.to_text(hd_alphabet())));
    for j in 0..=(n as i32) / 2 {
        let kj = k.coefficient(2 * j);
        c.check(is_total_derivative(&kj, U), || {
            format!("euler(k_{}) = {}", 2 * j, show(&euler(&kj, U)))
        });
    }
    c.note(format!("Riccati residual zero through z^({})", 1 - n as i32));
    Ok(())
}

fn lenard(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let order = v.order.max(1);
    let ladder = lenard_ladder(order).map_err(err)?;
    let x0 = p("u^(-1/2)").diff_x_n(3).scale(&rat(-1, 2));
    c.check(ladder.fields[0] == x0, || format!("X0 = {}", show(&ladder.fields[0])));
    let grad0 = euler(&solve_riccati_hd(0).coefficient(-1).scale(&rat(2, 1)), U);
    c.check(ladder.fields[0] == dymforge::hdcore::apply_p0(&grad0), || "P0 euler(2 k_m1) != X0".into());
    let cm = hd_classical_match().map_err(err)?;
    c.check(cm == rat(-1, 4), || format!("classical constant {cm}"));
    let rc = rho_form_constant().map_err(err)?;
    c.check(rc == rat(-1, 4), || format!("rho-form constant {rc}"));
    c.note(format!("chain and gradient duality hold for j = 0..{order}"));
    Ok(())
}

fn casimir(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let n = v.order.max(1);
    let r = casimir_residual(n + 1).map_err(err)?;
    c.check(r.is_zero(), || format!("P_λ w = {}", r.to_text(hd_alphabet())));
    let floor = r.floor().unwrap_or(i32::MIN);
    c.check(floor <= -2 * n as i32, || format!("residual known only to z^{floor}"));
    let w = solve_casimir_w(n);
    c.check(w.w.is_even(), || "w has an odd power of z".into());
    let eq = casimir_equation_residual(&w.w).map_err(err)?;
    c.check(eq.is_zero(), || format!("Casimir equation residual {}", eq.to_text(hd_alphabet())));
    c.note(format!("P_λ w(λ) = 0 through λ^(-{n})"));
    Ok(())
}

fn factorization(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    for n in [v.order, v.order.max(8)] {
        let ok = factorization_check(n).map_err(err)?;
        c.check(ok, || format!("operator identity fails at order {n}"));
    }
    Ok(())
}

fn z_pow(l: i32) -> Series {
    LaurentSeries::monomial(DiffPoly::one(), l)
}

fn currents(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let n = v.order.max(4);
    let c2 = current(2, n).map_err(err)?;
    c.check(c2.combo == vec![p("k_m1^(-2)")], || {
        format!("K^(2) combo {:?}", c2.combo.iter().map(show).collect::<Vec<_>>())
    });
    let mut basis = FdbBasis::new(constrained_k(n + 3).map_err(err)?).map_err(err)?;
    for l in [2usize, 4] {
        let cl = dymforge::hdkp::current_in(&mut basis, l).map_err(err)?;
        c.check(cl.series.agrees_with(&z_pow(l as i32)), || {
            format!("constrained K^({l}) = {}", cl.series.to_text(hd_alphabet()))
        });
    }
    for j in [2usize, 4] {
        let f = flow_in(&mut basis, j).map_err(err)?;
        c.check(f.is_zero() && !f.assignment.is_empty(), || format!("even flow t_{j} moves k"));
    }
    let f3 = flow_in(&mut basis, 3).map_err(err)?;
    let lhs = f3.get(-1).cloned().unwrap_or_default().mul_ref(&p("2*k_m1"));
    let x0 = substitute(&hd_vector_field(), &u_to_k_bindings(), hd_alphabet()).map_err(err)?;
    c.check(lhs == x0, || format!("2 k_m1 dk_m1/dt3 = {}", show(&lhs)));
    for j in [2usize, 3, 5] {
        let (l, r) = conservation_sides(j, n + 2).map_err(err)?;
        c.check(l.agrees_with(&r), || format!("consistency with HD fails for t_{j}"));
    }
    Ok(())
}

fn central_equivalence(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let (m, n) = (v.family, v.order);
    let alphabet = CentralAlphabet::new(m, n);
    let fam = CurrentFamily::free(&alphabet);
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let numeric = CurrentFamily::from_coefficients(m, n, |i, l| {
        let base = if i == 1 && l == -1 { 1.0 } else { 0.0 };
        base + rng.gen_range(-0.5..0.5)
    });
    let mut skipped = 0;
    for i in 1..m {
        for j in 1..=m - i {
            let (a, b) = match (cs_rhs_explicit(i, j, &fam), cs_rhs_projection(i, j, &fam)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            c.check(a.agrees_with(&b), || {
                format!("explicit and projection forms differ for (i, j) = ({i}, {j})")
            });
            let sym = cs_rhs_projection(j, i, &fam).map_err(err)?;
            c.check(sym.agrees_with(&b), || format!("dK^({i})/dt_{j} != dK^({j})/dt_{i}"));
            let na = cs_rhs_explicit(i, j, &numeric).map_err(err)?;
            let nb = cs_rhs_projection(i, j, &numeric).map_err(err)?;
            let gap = na.sub(&nb).map_err(err)?.terms().map(|(_, x)| x.abs()).fold(0.0, f64::max);
            c.check(gap < 1e-12, || format!("numeric gap {gap:e} at ({i}, {j}), seed {}", v.seed));
        }
    }
    c.note(format!("free family M = {m}, N = {n}; {skipped} pairs without a known coefficient"));
    Ok(())
}

fn commutativity(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    let (m, n) = (v.family, v.order);
    let fam = CurrentFamily::free(&CentralAlphabet::new(m, n));
    let mut pairs = 0;
    for (i, j) in [(1, 2), (2, 3), (2, 4), (3, 4), (1, 3)] {
        if i + j + 1 > m {
            continue;
        }
        let r = cs_commute_residual(i, j, &fam, n).map_err(err)?;
        pairs += 1;
        c.check(r.vanishes(), || match r.nonzero.first() {
            Some((l, k, res)) => format!("[t_{i}, t_{j}] K^{l}_{k} = {res:?}"),
            None => format!("[t_{i}, t_{j}]: nothing checkable"),
        });
    }
    c.check(pairs > 0, || format!("family M = {m} too small for any commutator"));
    for (i, j) in [(2, 3), (3, 3)] {
        let r = commute_check(i, j, n, 3).map_err(err)?;
        c.check(r.passed(), || format!("HD-KP flows t_{i}, t_{j} fail to commute at k_{:?}", r.failures.first()));
    }
    let r = dymforge::hdkp::commute_check_in(trivial_k(), 2, 3, 3).map_err(err)?;
    c.check(r.passed(), || "flows on k = z".into());
    Ok(())
}

fn spatialization(c: &mut Checker, v: VerifyParams) -> SuiteResult {
    // k K^(j) keeps a coefficient at or below z^1 only while j <= depth + 1
    let m = v.family.max(3);
    let depth = (m - 2).max(v.order.min(3));
    let r = spatialization_check(&free_k(depth + m), m, depth).map_err(err)?;
    c.check(r.passed(), || format!("{r:?}"));
    let t = spatialization_check(&trivial_k(), m, depth).map_err(err)?;
    c.check(t.passed(), || format!("k = z: {t:?}"));
    // K^(2) = z^2 makes the t_2 flow stationary on the whole family
    let fam = CurrentFamily::from_k(&constrained_k(depth + m).map_err(err)?, m, depth).map_err(err)?;
    for i in 1..m - 1 {
        let d = cs_rhs_projection(i, 2, &fam).map_err(err)?;
        c.check(d.is_zero(), || format!("t_2 moves K^({i}) under K^(2) = z^2"));
    }
    let k2 = fam.current(2).map_err(err)?;
    c.check(k2.agrees_with(&z_pow(2)), || "constrained K^(2) != z^2".into());
    let _ = k(-1);
    c.note(format!("currents K^(1)..K^({m}) to z^-{depth}; {} coefficients compared", r.compared));
    Ok(())
}

fn conservation_numeric(c: &mut Checker, _v: VerifyParams) -> SuiteResult {
    let s = conservation_study().map_err(err)?;
    for m in 0..2 {
        let d = s.pinned_drift(m);
        c.check(d < 1e-6, || format!("drift of {} is {d:e}", s.monitors[m]));
        c.check(s.halving_monotone(m), || {
            format!("drift of {} grows under dt halving: {:?}", s.monitors[m], s.halving)
        });
    }
    c.check(s.coarse_monotone(0), || format!("coarse halving study not monotone: {:?}", s.coarse_halving));
    c.check(s.spatial_monotone(1), || format!("grid refinement study not monotone: {:?}", s.spatial));
    c.note(format!(
        "drift u^(1/2) {:.1e}, 2k1 {:.1e}, 2k3 {:.1e}; roundoff floor {DRIFT_ROUNDOFF_FLOOR:e}",
        s.pinned_drift(0),
        s.pinned_drift(1),
        s.pinned_drift(2)
    ));
    Ok(())
}

pub fn run_suite(suite: Suite, v: VerifyParams) -> SuiteReport {
    let start = Instant::now();
    let mut c = Checker {
        checks: 0,
        notes: Vec::new(),
        failure: None,
    };
    let f: fn(&mut Checker, VerifyParams) -> SuiteResult = match suite {
        Suite::Riccati => riccati,
        Suite::Lenard => lenard,
        Suite::Casimir => casimir,
        Suite::Factorization => factorization,
        Suite::Currents => currents,
        Suite::CentralEquivalence => central_equivalence,
        Suite::Commutativity => commutativity,
        Suite::Spatialization => spatialization,
        Suite::ConservationNumeric => conservation_numeric,
        Suite::All => unreachable!("expanded by the caller"),
    };
    if let Err(e) = f(&mut c, v) {
        c.failure.get_or_insert(format!("error: {e}"));
    }
    SuiteReport {
        suite: suite.to_string(),
        passed: c.failure.is_none() && c.checks > 0,
        checks: c.checks,
        notes: c.notes,
        counterexample: c.failure,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the suites concurrently and returns the reports in request order.
pub fn run_suites(suite: Suite, v: VerifyParams) -> Vec<SuiteReport> {
    let names = suite.expand();
    std::thread::scope(|s| {
        let handles: Vec<_> = names.iter().map(|&n| s.spawn(move || run_suite(n, v))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread")).collect()
    })
}

pub fn format_reports(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{tag} {:<20} {:>4} checks {:>8.2}s\n", r.suite, r.checks, r.seconds));
        for n in &r.notes {
            out.push_str(&format!("     {n}\n"));
        }
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} suites passed\n", reports.len()));
    if let Some(r) = reports.iter().find(|r| !r.passed) {
        out.push_str(&format!(
            "first counterexample ({}): {}\n",
            r.suite,
            r.counterexample.as_deref().unwrap_or("no checks ran")
        ));
    }
    out
}
