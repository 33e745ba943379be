use dymforge::numeric::{conservation_study, DRIFT_ROUNDOFF_FLOOR};

#[test]
fn drift_study() {
    let s = conservation_study().unwrap();
    eprintln!("{}", serde_json::to_string(&s).unwrap());
    assert_eq!(s.monitors, ["u^(1/2)", "2k1", "2k3"]);
    for m in 0..2 {
        assert!(s.pinned_drift(m) < 1e-6, "{}: {:e}", s.monitors[m], s.pinned_drift(m));
        assert!(s.halving_monotone(m), "{:?}", s.halving);
    }
    // the pinned run sits at roundoff, so the trend is read off the coarser studies
    assert!(s.halving.iter().all(|r| r.drift[0] < DRIFT_ROUNDOFF_FLOOR));
    assert!(s.coarse_monotone(0), "{:?}", s.coarse_halving);
    assert!(s.coarse_halving[0].drift[0] > DRIFT_ROUNDOFF_FLOOR);
    assert!(s.spatial_monotone(1), "{:?}", s.spatial);
    assert_eq!(s.spatial.iter().map(|r| r.n).collect::<Vec<_>>(), [16, 32, 64]);
}
