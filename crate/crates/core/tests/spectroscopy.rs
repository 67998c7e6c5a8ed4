use qa_entangle::model::{assemble_hamiltonian, AnnealSchedule, ProbeConfig, ProblemInstance};
use qa_entangle::qts::{
    estimate_populations, fit_gaussians, fit_peaks, lineshape_value, resonances, simulate_population_protocol,
    simulate_rate_spectrum,
};
use qa_entangle::model::Lineshape;
use qa_entangle::spectra::eigendecompose;
use qa_entangle::thermal::{Ensemble, Temperature};

fn sched() -> AnnealSchedule<f64> {
    AnnealSchedule::synthetic()
}

#[test]
fn resolved_peaks_sit_at_the_gap() {
    let inst = ProblemInstance::fm2();
    let s = 0.33;
    let gap = eigendecompose(&assemble_hamiltonian(&inst, &sched(), s, None).unwrap()).unwrap().gap();
    let probe = ProbeConfig { linewidth: 0.05, ..ProbeConfig::default() };
    let res = resonances(&inst, &sched(), s, None, &probe).unwrap();
    let probe = probe.with_grid(res.offsets[0] - 0.3, res.offsets[1] + 0.3, 2001);
    let spec = simulate_rate_spectrum(&inst, &sched(), s, None, &probe, None).unwrap();
    let fit = fit_peaks(&spec, 2).unwrap();
    assert!(!fit.unresolved);
    let (g, _) = fit.gap().unwrap();
    assert!((g - gap).abs() < 1e-3, "fit {g} vs {gap}");
}

#[test]
fn strong_bias_concentrates_weight_next_to_left_ground() {
    let inst = ProblemInstance::fm2();
    let probe = ProbeConfig::default();
    let res = resonances(&inst, &sched(), 0.5, Some(-3.0), &probe).unwrap();
    let w = &res.weights;
    let top = w.iter().cloned().fold(0.0, f64::max);
    assert!(top > 0.99, "{w:?}");
    // The dominant level is the one closest in energy to ψ_0^L.
    let k = w.iter().position(|&x| x == top).unwrap();
    let nearest = (0..w.len())
        .min_by(|&a, &b| res.offsets[a].abs().partial_cmp(&res.offsets[b].abs()).unwrap())
        .unwrap();
    assert_eq!(k, nearest);
    let far: f64 = w.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x).sum();
    assert!(far < 1e-2);
}

#[test]
fn close_gaussians_are_flagged() {
    let width = 0.4;
    let x: Vec<f64> = (0..=400).map(|k| -1.5 + 0.01 * k as f64).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| lineshape_value(Lineshape::Gaussian, v + 0.1, width) + lineshape_value(Lineshape::Gaussian, v - 0.1, width))
        .collect();
    assert!(fit_gaussians(&x, &y, 2, width).unwrap().unresolved);

    let y: Vec<f64> = x
        .iter()
        .map(|&v| lineshape_value(Lineshape::Gaussian, v + 0.6, width) + lineshape_value(Lineshape::Gaussian, v - 0.6, width))
        .collect();
    let fit = fit_gaussians(&x, &y, 2, width).unwrap();
    assert!(!fit.unresolved);
    assert!((fit.gap().unwrap().0 - 1.2).abs() < 1e-6);
}

#[test]
fn coarse_grid_is_rejected() {
    let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
    let y = vec![1.0; 20];
    assert!(fit_gaussians(&x, &y, 1, 0.4).is_err());
}

#[test]
fn protocol_round_trip_against_boltzmann() {
    let t = Temperature::from_millikelvin(12.5).unwrap();
    let kt = 20.8366e-3 * 12.5;
    for s in [0.3, 0.45, 0.6] {
        let inst = ProblemInstance::fm2();
        let out = simulate_population_protocol(&inst, &sched(), s, Ensemble::Thermal(t), &ProbeConfig::default(), 4)
            .unwrap();
        let e = eigendecompose(&assemble_hamiltonian(&inst, &sched(), s, None).unwrap()).unwrap();
        let e = e.energies();
        let z: f64 = e.iter().map(|x| (-(x - e[0]) / kt).exp()).sum();
        for (k, p) in out.estimate.p.iter().enumerate() {
            assert!((p - (-(e[k] - e[0]) / kt).exp() / z).abs() < 1e-6);
        }
        assert!(out.conservation.iter().all(|&c| c < 1e-12));
    }
}

#[test]
fn probe_ratio_inverts_the_left_occupation() {
    for p in [0.0f64, 0.1, 0.5, 0.9, 0.999] {
        let pl = p / (1.0 + p);
        let est = estimate_populations(&[(0.0, pl)]).unwrap();
        assert!((est.p[0] - p).abs() < 1e-12);
    }
}
