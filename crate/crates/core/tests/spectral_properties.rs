use hn_spectra::cocycle::{lyapunov_field, PhaseSamples};
use hn_spectra::spectral::{classify_value, default_tol0, EnergyLabel};
use hn_spectra::*;

fn golden() -> BaseSystem {
    BaseSystem::Rotation { alpha: golden_mean() }
}

#[test]
fn classification_exits_monotonically_along_vertical_rays() {
    let base = golden();
    let x0 = base.phase(&[0.0]);
    let p = Potential::cosine(0.5);
    let samples = PhaseSamples::new(&base, &p, &x0, &LyapunovConfig::with_steps(20_000)).unwrap();
    let g = 0.5;
    let tol0 = 3e-3;
    for re in [-1.2, 0.0, 0.7] {
        let start = samples.estimate(C64::new(re, 0.0), 0.0);
        assert_eq!(classify_value(start.value, g, tol0).label, EnergyLabel::EMinus);
        let labels: Vec<EnergyLabel> = (0..=400)
            .map(|k| classify_value(samples.estimate(C64::new(re, 2.0 * k as f64 / 400.0), 0.0).value, g, tol0).label)
            .collect();
        let mut seq = labels.clone();
        seq.dedup();
        assert_eq!(seq, vec![EnergyLabel::EMinus, EnergyLabel::EZero, EnergyLabel::EPlus], "E = {re}");
    }
}

#[test]
fn level_sets_are_conjugation_symmetric_and_regimes_consistent() {
    let base = golden();
    let x0 = base.phase(&[0.0]);
    let p = Potential::cosine(0.5);
    let grid = GridSpec::new((-4.0, 4.0), (-2.0, 2.0), 81, 41);
    let field = lyapunov_field(&base, &p, 0.0, &grid, &x0, &LyapunovConfig::with_steps(10_000)).unwrap();
    let tol0 = default_tol0(&field);
    let sigma0 = real_spectrum_sigma0(
        &base,
        &p,
        &x0,
        &Sigma0Config { re_min: -4.0, re_max: 4.0, n_points: 401, resolution: 1e-3, uh: UhConfig::default() },
    )
    .unwrap();
    let tr = transition_report(&field, &sigma0.intervals, tol0).unwrap();
    // subcritical cosine: L vanishes on the spectrum
    assert!(tr.g_lower.abs() < 1e-2 && tr.g_upper.abs() < 1e-2, "{tr:?}");
    let step = grid.step();
    for g in [0.0, 0.3, 0.8] {
        let s = assemble_spectrum(&field, g, &sigma0.intervals, tol0).unwrap();
        let pts: Vec<C64> = s.complex_part.iter().flat_map(|c| c.points.iter().copied()).collect();
        for z in &pts {
            let d = pts.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= step, "g {g}: {z} has no mirror image ({d})");
        }
        match tr.regime(g) {
            Regime::AllReal => assert!(s.max_abs_imag() <= 2.0 * step),
            Regime::AllComplex => assert!(s.real_part.is_empty()),
            Regime::Mixed => {}
        }
    }
}
