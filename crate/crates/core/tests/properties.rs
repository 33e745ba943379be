use proptest::prelude::*;

use dymforge::algebra::{euler, rat, DiffPoly};
use dymforge::central::{cs_rhs_explicit, cs_rhs_projection, pi_split, CurrentFamily};
use dymforge::hdcore::{riccati_residual, solve_riccati_hd, Series};
use dymforge::hdkp::{current_in, fdb, free_k, FdbBasis};
use dymforge::laurent::{LaurentSeries, Precision};
use dymforge::numeric::{
    fd_diff, functional_eval, simulate_hd, spectral_diff, stable_dt, standard_monitors, DiffBackend, GridField,
};
use dymforge::rings::{hd_alphabet, k, u, U};

fn p(s: &str) -> DiffPoly {
    DiffPoly::parse(s, hd_alphabet()).unwrap()
}

fn arb_u_poly() -> impl Strategy<Value = DiffPoly> {
    let names = ["u", "u1", "u2", "u3", "u^(1/2)", "u^(-1/2)", "u^(-1)", "k_m1", "k0", "k1_1"];
    let term = (-5i64..6, 1i64..4, proptest::sample::subsequence(names.to_vec(), 0..3));
    proptest::collection::vec(term, 1..4).prop_map(|ts| {
        let mut acc = DiffPoly::zero();
        for (n, d, fs) in ts {
            let mut t = DiffPoly::constant(rat(n, d));
            for f in fs {
                t = t.mul_ref(&p(f));
            }
            acc.add_assign_ref(&t);
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riccati_residual_vanishes_for_every_order(n in 0usize..=12) {
        let k = solve_riccati_hd(n);
        let r = riccati_residual(&k.k, &u()).unwrap();
        prop_assert!(r.is_zero());
        prop_assert_eq!(r.floor(), Some(1 - n as i32));
    }

    #[test]
    fn series_json_round_trips(cs in proptest::collection::vec(arb_u_poly(), 1..5), top in -2i32..4, exact: bool) {
        let len = cs.len() as i32;
        let precision = if exact { Precision::Exact } else { Precision::Known(top - len) };
        let s = Series::from_terms(cs.into_iter().enumerate().map(|(i, c)| (top - i as i32, c)), top, precision).unwrap();
        let back = LaurentSeries::from_json(&s.to_json(hd_alphabet()), hd_alphabet()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn euler_annihilates_x_derivatives(a in arb_u_poly()) {
        let d = a.diff_x();
        prop_assert!(euler(&d, U).is_zero());
    }

    #[test]
    fn fdb_degree_ladder(j in 0usize..=10) {
        let basis = fdb(j, 3).unwrap();
        let e = basis.element(j as i32).unwrap();
        prop_assert_eq!(e.top(), j as i32);
        prop_assert_eq!(e.coeff_at(j as i32).unwrap(), k(-1).pow(j as u32));
    }

    #[test]
    fn current_normalization(l in 2usize..=6) {
        let mut basis = FdbBasis::new(free_k(l + 2)).unwrap();
        let c = current_in(&mut basis, l).unwrap().series;
        prop_assert_eq!(c.top(), l as i32);
        prop_assert_eq!(c.coeff_at(l as i32).unwrap(), DiffPoly::one());
        for m in 2..l as i32 {
            prop_assert!(c.coeff_at(m).unwrap().is_zero());
        }
    }

    #[test]
    fn pi_split_reassembles(coeffs in proptest::collection::vec(-3i32..4, 12)) {
        let fam = CurrentFamily::from_coefficients(6, 4, |i, l| f64::from(coeffs[(i as i32 + l + 1) as usize % 12]));
        let s = fam.current(2).unwrap().mul(fam.current(3).unwrap()).unwrap();
        let split = pi_split(&s, &fam).unwrap();
        prop_assert!(split.minus.terms().all(|(d, _)| d <= 1));
        let mut plus = LaurentSeries::<f64>::zero();
        for (m, c) in &split.coordinates {
            plus = plus.add(&fam.current(*m).unwrap().scale(c)).unwrap();
        }
        let whole = plus.add(&split.minus).unwrap();
        let gap = whole.sub(&s).unwrap().terms().map(|(_, x)| x.abs()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-9, "gap {gap}");
    }

    #[test]
    fn numeric_families_obey_the_explicit_formulas(vals in proptest::collection::vec(-1.0f64..1.0, 64), i in 1usize..4, j in 1usize..4) {
        let fam = CurrentFamily::from_coefficients(7, 5, |a, l| vals[(a * 7 + (l + 1) as usize) % 64]);
        let a = cs_rhs_explicit(i, j, &fam).unwrap();
        let b = cs_rhs_projection(i, j, &fam).unwrap();
        let gap = a.sub(&b).unwrap().terms().map(|(_, x)| x.abs()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-10, "gap {gap} at ({i}, {j})");
    }

    #[test]
    fn derivative_backends_agree(a in -1.0f64..1.0, b in -1.0f64..1.0, m in 1u32..4) {
        let f = GridField::from_fn(64, |x| a * (m as f64 * x).sin() + b * (2.0 * x).cos()).unwrap();
        let s = spectral_diff(&f, 1);
        let d = fd_diff(&f, 1);
        // fourth-order differences: error ~ (m dx)^4 m / 30
        let dx = f.dx();
        let bound = 0.1 * (3.0f64 * dx).powi(4) * 3.0 + 1e-12;
        prop_assert!(s.max_abs_diff(&d) < bound);
    }

    #[test]
    fn short_runs_conserve_the_monitors(amp in 0.02f64..0.3, phase in 0.0f64..6.0) {
        let u0 = GridField::from_fn(64, |x| 1.0 + amp * (x + phase).sin()).unwrap();
        let mons = standard_monitors(2).unwrap();
        let dt = stable_dt(&u0);
        let r = simulate_hd(&u0, dt, 200, &mons, 200).unwrap();
        prop_assert!(r.drift.iter().all(|d| *d < 1e-9), "{:?}", r.drift);
        let mass = functional_eval(&mons[0].density, &r.final_u, DiffBackend::Spectral).unwrap();
        prop_assert!(mass.is_finite());
    }
}
