use gradwave::{
    classify, critical_exponent, gamma_tilde, kernels, lifespan_exponent, run, GradedStructure, Grid, Regime,
    RunStatus, SimulationConfig,
};

fn line_config(p: f64, epsilon: f64, t_max: f64) -> SimulationConfig {
    let grid = Grid::new(vec![2000.0], vec![8192]).unwrap();
    let mut c = SimulationConfig::new(GradedStructure::isotropic(1, 1), grid, p, epsilon, 0.25, 0.5, t_max);
    c.sample_stride = 4;
    c
}

#[test]
fn supercritical_small_data_is_global_with_bounded_weighted_norms() {
    let out = run(line_config(4.0, 0.01, 1e3)).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    assert_eq!(out.t_end, 1e3);
    let peak = |lo: f64, hi: f64, f: fn(&gradwave::Sample) -> f64| {
        out.series.iter().filter(|s| s.t >= lo && s.t <= hi).map(f).fold(0.0, f64::max)
    };
    for f in [|s: &gradwave::Sample| s.weighted_l2, |s: &gradwave::Sample| s.weighted_hs] {
        let early = peak(0.0, 500.0, f);
        let late = peak(500.0, 1e3, f);
        assert!(early.is_finite() && early > 0.0);
        assert!(late <= 1.05 * early, "weighted norm grew: {early} -> {late}");
    }
}

#[test]
fn subcritical_large_data_blows_up() {
    let out = run(line_config(2.0, 0.5, 1e3)).unwrap();
    assert_eq!(out.status, RunStatus::BlewUp);
    let t = out.lifespan.unwrap();
    assert!(t > 0.0 && t < 1e3);
}

#[test]
fn deep_subcritical_power_blows_up_for_every_amplitude() {
    for eps in [1.0, 0.1, 0.01] {
        let out = run(line_config(1.05, eps, 1e4)).unwrap();
        assert_eq!(out.status, RunStatus::BlewUp, "eps = {eps}");
    }
}

#[test]
fn zero_amplitude_stays_zero() {
    let out = run(line_config(2.0, 0.0, 100.0)).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    assert!(out.series.iter().all(|s| s.l2 == 0.0 && s.max_abs == 0.0));
}

#[test]
fn kernel_reference_values() {
    let k = kernels(1.0, 0.3).unwrap();
    // closed form with roots -0.9 and -0.1
    let (a, b) = ((-0.9f64).exp(), (-0.1f64).exp());
    assert!((k.k0 - (-0.9 * b + 0.1 * a) / -0.8).abs() < 1e-14);
    assert!((k.k1 - (a - b) / -0.8).abs() < 1e-14);
    assert!((k.k0 - 0.967116).abs() < 1e-5 && (k.k1 - 0.622837).abs() < 1e-5);
    let k = kernels(2.0, 0.5).unwrap();
    assert!((k.k1 - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
    let k = kernels(0.0, 3.7).unwrap();
    assert_eq!((k.k0, k.k1), (1.0, 0.0));
}

#[test]
fn exponent_reference_values() {
    assert!((critical_exponent(3.0, 0.5, 2.0).unwrap() - 2.0).abs() < 1e-15);
    assert!((gamma_tilde(4.0, 2.0).unwrap() - 1.236068).abs() < 1e-6);
    assert!((gamma_tilde(3.0, 2.0).unwrap() - 1.137459).abs() < 1e-6);
    assert!((lifespan_exponent(1.0, 0.25, 2.0, 2.0).unwrap() - 1.6).abs() < 1e-12);
    assert!((lifespan_exponent(2.0, 0.5, 2.0, 1.8).unwrap() - 2.0).abs() < 1e-12);

    let line = GradedStructure::isotropic(1, 1);
    let r = classify(&line, 0.25, 1.0, 2.0).unwrap();
    assert_eq!(r.regime, Regime::Subcritical);
    assert!((r.kappa.unwrap() - 1.6).abs() < 1e-12);

    let four = GradedStructure::isotropic(4, 1);
    let r = classify(&four, 1.0, 1.0, 2.0).unwrap();
    assert_eq!(r.regime, Regime::Supercritical);
    assert!(r.global_hypotheses_met);
    let r = classify(&four, 1.5, 1.0, 1.5).unwrap();
    assert!((r.lower_bound - 1.75).abs() < 1e-15 && r.lower_inclusive);
    assert!(!r.global_hypotheses_met);

    let heis = GradedStructure::new(vec![1, 2], vec![1.0, 1.0], 2).unwrap();
    assert_eq!((heis.homogeneous_dim(), heis.degree()), (3, 4));
    assert_eq!(heis.symbol(&[1.0, 1.0]).unwrap(), 2.0);
    assert_eq!(heis.symbol(&[2.0, 4.0]).unwrap(), 32.0);
    assert!(GradedStructure::new(vec![1, 2], vec![1.0, 1.0], 3).is_err());
}
