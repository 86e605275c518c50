use sturm_core::characteristics::{dimension_sweep, SWEEP_LAMBDAS};
use sturm_core::{asymptotic_constants, multifractal_spectrum, run_suite, spectral_characteristics, Depth, SuiteConfig};

#[test]
fn constants_are_ordered_with_the_sweep() {
    let k = asymptotic_constants(&[1]).unwrap();
    let sweep = dimension_sweep(&[1], &SWEEP_LAMBDAS, Depth { max_len: 8, budget: 20_000 }).unwrap();
    assert!(sweep.scaled.windows(2).all(|w| w[0] < w[1]));
    let rho_dim = sweep.estimate;
    assert!(0.0 < k.rho_gamma.value && k.rho_gamma.value <= k.rho_d.value);
    assert!(k.rho_d.value <= rho_dim && rho_dim <= k.rho_transport.value);
    // log(1 + √2)
    assert!((rho_dim - 0.881_373_587).abs() < 5e-3, "{rho_dim}");
}

#[test]
fn periods_with_larger_entries() {
    let c = spectral_characteristics(&[2, 3], 24.0).unwrap();
    assert!(c.margin() > 1e-3);
    let pts = multifractal_spectrum(&[2, 3], 24.0, &[c.d]).unwrap();
    assert!((pts[0].dim - c.d).abs() < 1e-6);
}

#[test]
fn default_suite_is_green() {
    let reports = run_suite(&SuiteConfig::default()).unwrap();
    assert_eq!(reports.len(), 8);
    assert!(reports.iter().all(|r| r.passed), "{reports:?}");
    assert!(reports.windows(2).all(|w| w[0].name < w[1].name));
}
