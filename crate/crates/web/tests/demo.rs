use specreg_web::{filter_residuals, fit_demo, rate_table, FILTER_NAMES, PLOT_POINTS};

#[test]
fn rate_table_doubles_and_decreases() {
    let t = rate_table(2.0, 400, 0.5, 0.1, 1.0, 1024).unwrap();
    assert_eq!(t.n, vec![16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]);
    assert_eq!(t.lambda.len(), t.n.len());
    for w in t.lambda.windows(2) {
        assert!(w[1] <= w[0]);
    }
    for w in t.rate_h.windows(2) {
        assert!(w[1] < w[0]);
    }
    // mu_1 = 1 makes the L^2 rate no larger than the H rate
    for (h, l2) in t.rate_h.iter().zip(&t.rate_l2) {
        assert!(l2 <= h);
    }
    for w in t.effective_dimension.windows(2) {
        assert!(w[1] >= w[0]);
    }
}

#[test]
fn residuals_layout_and_values() {
    let lam = 1e-2;
    let res = filter_residuals(lam, 41).unwrap();
    assert_eq!(res.t.len(), 41);
    assert_eq!(res.values.len(), 41 * FILTER_NAMES.len());
    assert!((res.t[0] - 1e-4).abs() < 1e-18 && (res.t[40] - 1.0).abs() < 1e-15);
    // Tikhonov row: lambda / (lambda + t)
    for (i, &t) in res.t.iter().enumerate() {
        assert!((res.values[i] - lam / (lam + t)).abs() < 1e-14);
    }
    // spectral cutoff row is an indicator of t < lambda
    let cutoff = &res.values[41..82];
    for (&t, &v) in res.t.iter().zip(cutoff) {
        assert_eq!(v, if t < lam { 1.0 } else { 0.0 });
    }
    assert!(filter_residuals(0.0, 10).is_err());
    assert!(filter_residuals(0.5, 1).is_err());
}

#[test]
fn fit_demo_is_reproducible_and_sane() {
    let a = fit_demo(2.0, 200, 0.5, 0.1, 300, 1.0, "tikhonov", 7).unwrap();
    let b = fit_demo(2.0, 200, 0.5, 0.1, 300, 1.0, "tikhonov", 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.grid.len(), PLOT_POINTS);
    assert_eq!(a.x.len(), 300);
    assert!(a.error_l2 <= a.error_h && a.error_h.is_finite());

    // a heavily over-smoothed fit must do worse in L^2 than the rule
    let smooth = fit_demo(2.0, 200, 0.5, 0.1, 300, 1e3, "tikhonov", 7).unwrap();
    assert!(smooth.error_l2 > a.error_l2);

    for name in FILTER_NAMES {
        assert!(fit_demo(2.0, 100, 0.5, 0.1, 100, 1.0, name, 1).is_ok(), "{name}");
    }
    assert!(fit_demo(2.0, 100, 0.5, 0.1, 100, 1.0, "ridge", 1).is_err());
    assert!(fit_demo(2.0, 100, 0.5, 0.1, 0, 1.0, "tikhonov", 1).is_err());
    assert!(fit_demo(2.0, 100, 0.5, 0.1, 100, -1.0, "tikhonov", 1).is_err());
}
