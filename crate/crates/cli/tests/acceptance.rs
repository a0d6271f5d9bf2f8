//! Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//!
//! Run with `cargo test -p hn-spectra-cli --test acceptance -- --nocapture`
//! to see the lines. Heavy fields are computed once and shared.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hn_spectra::cocycle::{LyapunovField, Mat2};
use hn_spectra::dos::support_vs_spectrum;
use hn_spectra::finite::match_eigenvalues;
use hn_spectra::spectral::{default_tol0, oracle_free_l, oracle_single_exp_l, Sigma0Config};
use hn_spectra::{
    assemble_spectrum, build, decay_fit, dirichlet_g_invariance, eigenvalues, empirical_dos, golden_mean,
    green_forward, green_hyperbolic, log_potential, lyapunov, lyapunov_field, real_spectrum_sigma0, thouless_check,
    transfer_product, transition_report, BaseSystem, Boundary, EigenOptions, EmpiricalMeasure, GreenConfig, GridSpec,
    LyapunovConfig, Phase, Potential, Regime, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn golden() -> (BaseSystem, Phase) {
    let b = BaseSystem::Rotation { alpha: golden_mean() };
    let x = b.phase(&[0.0]);
    (b, x)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn field(p: &Potential, grid: GridSpec) -> LyapunovField {
    let (b, x) = golden();
    lyapunov_field(&b, p, 0.0, &grid, &x, &LyapunovConfig::default()).unwrap()
}

fn sigma0(p: &Potential) -> Vec<[f64; 2]> {
    let (b, x) = golden();
    real_spectrum_sigma0(&b, p, &x, &Sigma0Config::for_potential(p, &b)).unwrap().intervals
}

/// A criterion verdict: pass flag and the numbers behind it.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

/// Shared cosine lambda = 2 data: the field on [-8, 8] x [-4, 4] and Sigma(0).
struct Cosine {
    field: LyapunovField,
    sigma0: Vec<[f64; 2]>,
}

fn cosine() -> Cosine {
    let p = Potential::cosine(2.0);
    Cosine { field: field(&p, GridSpec::new((-8.0, 8.0), (-4.0, 4.0), 201, 201)), sigma0: sigma0(&p) }
}

fn free_lyapunov_oracle() -> Verdict {
    let (b, x) = golden();
    let est = lyapunov(&b, &Potential::zero(), c(3.0), 0.0, &x, &LyapunovConfig::with_steps(100_000)).unwrap();
    let point_err = (est.value - 0.962424).abs();
    let grid = GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 61, 41);
    let start = Instant::now();
    let f = lyapunov_field(&b, &Potential::zero(), 0.0, &grid, &x, &LyapunovConfig::with_steps(10_000)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut grid_err = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            grid_err = grid_err.max((f.at(i, j) - oracle_free_l(grid.node(i, j))).abs());
        }
    }
    Verdict::new(
        point_err < 1e-3 && grid_err < 2e-3 && secs < 60.0,
        format!("L(3) = {:.6} (err {point_err:.2e}), grid max err {grid_err:.2e}, grid time {secs:.1} s", est.value),
    )
}

fn plateau() -> Verdict {
    let p = Potential::single_exponential(c(2.0));
    let grid = GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 301, 201);
    let f = field(&p, grid);
    let mut field_err = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let z = grid.node(i, j);
            field_err = field_err.max((f.at(i, j) - oracle_single_exp_l(z, c(2.0))).abs());
        }
    }
    let tol0 = default_tol0(&f);
    let ellipse = PI * 2.5 * 1.5;
    let area = |g: f64| assemble_spectrum(&f, g, &[], tol0).unwrap().filled_area();
    let (a0, lo, hi) = (area(2f64.ln()), area(2f64.ln() - 0.2), area(2f64.ln() + 0.2));
    let rel = (a0 - ellipse).abs() / ellipse;
    Verdict::new(
        field_err < 5e-3 && rel < 0.05 && lo < 0.01 * ellipse && hi < 0.01 * ellipse,
        format!(
            "field max err {field_err:.2e}; area at log 2 = {a0:.3} (rel {rel:.3} vs {ellipse:.3}); \
             at log 2 -/+ 0.2: {lo:.3}, {hi:.3}"
        ),
    )
}

fn bridge(cos: &Cosine) -> Verdict {
    let (b, x) = golden();
    let opts = EigenOptions::default();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut case = |name: &str, p: &Potential, g: f64, f: &LyapunovField, s0: &[[f64; 2]]| {
        let set = assemble_spectrum(f, g, s0, default_tol0(f)).unwrap();
        let mu = empirical_dos(&b, p, &x, 2048, g, Boundary::Periodic, &opts).unwrap();
        let r = support_vs_spectrum(&mu, &set);
        let h = r.hausdorff_out.max(r.hausdorff_in);
        let ok = h < 3.0 * r.sample_step;
        pass &= ok;
        lines.push(format!(
            "{name}: out {:.3}, in {:.3} ({:.1} steps)",
            r.hausdorff_out,
            r.hausdorff_in,
            h / r.sample_step
        ));
    };
    let free = Potential::zero();
    let ffree = field(&free, GridSpec::new((-4.0, 4.0), (-3.0, 3.0), 201, 201));
    case("free g=1", &free, 1.0, &ffree, &sigma0(&free));
    let p = Potential::cosine(2.0);
    case("cosine g=0.3", &p, 0.3, &cos.field, &cos.sigma0);
    case("cosine g=1.2", &p, 1.2, &cos.field, &cos.sigma0);
    let p = Potential::single_exponential(c(2.0));
    let fexp = field(&p, GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 201, 201));
    case("single-exp g=log 2", &p, 2f64.ln(), &fexp, &[]);
    Verdict::new(pass, lines.join("; "))
}

fn finite_oracles() -> Verdict {
    let (b, x) = golden();
    let opts = EigenOptions::default();
    let free = Potential::zero();
    let mut circ = 0.0f64;
    for g in [0.0, 0.5, 1.0] {
        let n = 64;
        let ev = eigenvalues(&build(&b, &free, &x, n, g, Boundary::Periodic).unwrap(), &opts).unwrap().eigenvalues;
        let want: Vec<C64> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                -C64::new(g, t).exp() - C64::new(-g, -t).exp()
            })
            .collect();
        circ = circ.max(match_eigenvalues(&ev, &want, 1e-9).max_distance);
    }
    let n = 10;
    let ev = eigenvalues(&build(&b, &free, &x, n, 0.0, Boundary::Dirichlet).unwrap(), &opts).unwrap().eigenvalues;
    let want: Vec<C64> = (1..=n).map(|k| c(-2.0 * (k as f64 * PI / (n + 1) as f64).cos())).collect();
    let dir = match_eigenvalues(&ev, &want, 1e-9).max_distance;
    let mut inv = 0.0f64;
    for p in [free, Potential::cosine(2.0)] {
        inv = inv.max(dirichlet_g_invariance(&b, &p, &x, 32, 0.0, 1.0, &opts).unwrap().max_distance);
    }
    Verdict::new(
        circ < 1e-9 && dir < 1e-9 && inv < 1e-8,
        format!("circulant n=64 {circ:.1e}; Dirichlet cosines n=10 {dir:.1e}; g=0 vs g=1 n=32 {inv:.1e}"),
    )
}

fn trichotomy(cos: &Cosine) -> Verdict {
    let f = &cos.field;
    let tol0 = default_tol0(f);
    let tr = transition_report(f, &cos.sigma0, tol0).unwrap();
    let ln2 = 2f64.ln();
    let thresholds = (tr.g_lower - ln2).abs() < 5e-2 && (tr.g_upper - ln2).abs() < 5e-2;
    let low = assemble_spectrum(f, 0.3, &cos.sigma0, tol0).unwrap();
    let high = assemble_spectrum(f, 1.2, &cos.sigma0, tol0).unwrap();
    let r_low = tr.regime(0.3);
    let r_high = tr.regime(1.2);
    let low_ok = r_low == Regime::AllReal && low.complex_part.is_empty();
    let high_ok = r_high == Regime::AllComplex && high.real_part.is_empty();
    let mid = tr.regime(0.69);
    let (m_lower, m_upper) = tr.margins(0.69);
    // a threshold-adjacent label is one decided within 5e-2 of a threshold
    let mid_ok = mid == Regime::Mixed || m_lower.abs().min(m_upper.abs()) < 5e-2;
    Verdict::new(
        thresholds && low_ok && high_ok && mid_ok,
        format!(
            "g_lower {:.4}, g_upper {:.4}; regime(0.3) = {r_low:?} with {} contours; \
             regime(1.2) = {r_high:?} with {} real intervals; regime(0.69) = {mid:?}, \
             margins {m_lower:+.4} / {m_upper:+.4}",
            tr.g_lower,
            tr.g_upper,
            low.complex_part.len(),
            high.real_part.len()
        ),
    )
}

fn thouless() -> Verdict {
    let (b, x) = golden();
    let cases = [
        (
            "free g=0.5",
            Potential::zero(),
            0.5,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.5),
                C64::new(1.0, 0.3),
                C64::new(-1.2, 0.2),
                c(3.0),
                c(-3.0),
                C64::new(0.5, 2.0),
                C64::new(2.0, 1.5),
                C64::new(-2.5, -1.0),
                C64::new(0.0, 4.0),
            ],
        ),
        (
            "cosine g=1",
            Potential::cosine(2.0),
            1.0,
            vec![
                C64::new(0.0, 0.5),
                C64::new(1.5, 0.4),
                C64::new(-3.0, 0.4),
                C64::new(2.0, 0.3),
                c(8.0),
                c(-8.0),
                C64::new(0.0, 6.0),
                C64::new(4.0, 3.0),
                C64::new(-5.0, -2.0),
                C64::new(0.2, -0.4),
            ],
        ),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, p, g, probes) in cases {
        let r =
            thouless_check(&b, &p, &x, 4096, g, &probes, &EigenOptions::default(), &LyapunovConfig::default()).unwrap();
        let close = r.probes.iter().filter(|q| q.too_close).count();
        let (id, lim) = (r.max_identity_error(), r.max_limit_error());
        pass &= id < 1e-6 && lim < 1e-2 && close == 0;
        lines.push(format!("{name}: identity {id:.1e}, limit {lim:.1e}, probes near atoms {close}"));
    }
    Verdict::new(pass, lines.join("; "))
}

fn green_decay() -> Verdict {
    let (b, x) = golden();
    let cfg = GreenConfig::default();
    let free = Potential::zero();
    let fw = green_forward(&b, &free, &x, c(0.0), 1.0, 20, &cfg).unwrap();
    let ff = decay_fit(&fw).unwrap();
    let f_rate = ff.rate_right.unwrap_or(f64::NAN);
    let f_res = fw.residuals();
    let g = 0.5;
    let hw = green_hyperbolic(&b, &free, &x, c(3.0), g, 20, &cfg).unwrap();
    let hf = decay_fit(&hw).unwrap();
    let (right, left) = (hf.rate_right.unwrap_or(f64::NAN), hf.rate_left.unwrap_or(f64::NAN));
    let h_res = hw.residuals();
    let l = hw.lyapunov;
    let pass = f_rate >= 1.0 - fw.lyapunov - 0.05
        && f_rate >= 0.95
        && right >= l + g - 0.05
        && left >= l - g - 0.05
        && ((right - left) - 2.0 * g).abs() < 0.1
        && f_res.0.max(f_res.1) < 1e-8
        && h_res.0.max(h_res.1) < 1e-8;
    Verdict::new(
        pass,
        format!(
            "forward rate {f_rate:.4} (bound {:.4}), residual {:.1e}; hyperbolic rates {right:.4} / {left:.4} \
             (bounds {:.4} / {:.4}), difference {:.4}, residual {:.1e}",
            1.0 - fw.lyapunov - 0.05,
            f_res.0.max(f_res.1),
            l + g - 0.05,
            l - g - 0.05,
            right - left,
            h_res.0.max(h_res.1)
        ),
    )
}

/// Discrete circle mean of `log |. - a|` falls short of the exact mean by
/// at most `|log(1 - q^m)| / m`, `q` the ratio of the smaller to the larger
/// of `r` and `|z - a|`.
fn circle_mean_slack(mu: &EmpiricalMeasure, z: C64, r: f64, m: usize) -> f64 {
    mu.atoms
        .iter()
        .map(|&(a, w)| {
            let d = (z - a).norm();
            let q = d.min(r) / d.max(r);
            w * (1.0 - q.powi(m as i32)).ln().abs() / m as f64
        })
        .sum()
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_hn-spectra"))
        .args(args)
        .env_remove("HN_SPECTRA_THREADS")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn round_trip_identical(dir: &Path, task: serde_json::Value) -> bool {
    let (a, bdir) = (dir.join("a"), dir.join("b"));
    let cfg = json!({
        "model": {"base": {"kind": "rotation", "alpha": golden_mean()}, "potential": {"form": "cosine", "lambda": 2.0}, "g": 0.4},
        "task": task,
        "output": a,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    if !run_cli(&["run", path.to_str().unwrap()]) {
        return false;
    }
    let set = format!("output={}", bdir.display());
    if !run_cli(&["run", a.join("manifest.json").to_str().unwrap(), "--set", &set]) {
        return false;
    }
    let read = |d: &Path| -> serde_json::Value {
        serde_json::from_slice(&std::fs::read(d.join("manifest.json")).unwrap()).unwrap()
    };
    let (ma, mb) = (read(&a), read(&bdir));
    let files = ma["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string());
    ma["config_hash"] == mb["config_hash"]
        && files.into_iter().all(|f| std::fs::read(a.join(&f)).ok() == std::fs::read(bdir.join(&f)).ok())
}

fn property_suites() -> Verdict {
    let (b, _) = golden();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let potential = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => Potential::zero(),
        1 => Potential::cosine(rng.gen_range(0.1..3.0)),
        _ => Potential::single_exponential(C64::new(rng.gen_range(0.1..3.0), rng.gen_range(-1.0..1.0))),
    };
    let energy = |rng: &mut ChaCha8Rng| C64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-2.0..2.0));
    let cases = 200;
    let mut violations = [0usize; 6];

    for _ in 0..cases {
        let (p, e, g) = (potential(&mut rng), energy(&mut rng), rng.gen_range(0.0..1.0));
        let x0 = b.phase(&[rng.gen_range(0.0..1.0)]);
        let n = rng.gen_range(1..1000usize);
        // determinant
        let acc = transfer_product(&b, &p, e, g, &x0, n).unwrap();
        let want = -2.0 * n as f64 * g;
        let kappa = (2.0 * acc.log_norm() - want).exp();
        let rel = (acc.log_abs_det() - want).exp_m1().abs();
        if rel > if kappa <= 1e6 { 1e-9 } else { 64.0 * f64::EPSILON * kappa } {
            violations[0] += 1;
        }
        // additivity
        let m = rng.gen_range(1..1000usize);
        let whole = transfer_product(&b, &p, e, g, &x0, m + n).unwrap();
        let xn = b.step(&x0, n as i64).unwrap();
        let second = transfer_product(&b, &p, e, g, &xn, m).unwrap();
        let shift = (second.log_scale + acc.log_scale - whole.log_scale).exp();
        let rebuilt = second.current.mul(&acc.current).scale(c(shift));
        if rebuilt.max_diff(&whole.current) > 1e-9 * whole.current.max_abs() {
            violations[1] += 1;
        }
        // conjugation by D
        let v = energy(&mut rng);
        let gg = 3.0 * g;
        let d = Mat2::diag(c((-gg / 2.0).exp()), c((gg / 2.0).exp()));
        let dinv = Mat2::diag(c((gg / 2.0).exp()), c((-gg / 2.0).exp()));
        let lhs = dinv.mul(&Mat2::hatano_nelson(v, e, gg)).mul(&d);
        let rhs = Mat2::schrodinger(v, e).scale(c((-gg).exp()));
        if lhs.max_diff(&rhs) > 1e-12 * (1.0 + rhs.max_abs()) {
            violations[2] += 1;
        }
    }

    // conjugation symmetry of fields for real potentials
    let grid = GridSpec::new((-4.0, 4.0), (-2.0, 2.0), 17, 9);
    for _ in 0..6 {
        let a1 = rng.gen_range(0.1..2.0);
        let a2 = rng.gen_range(0.0..1.0);
        let p = Potential::fourier([(1, c(a1)), (-1, c(a1)), (2, c(a2)), (-2, c(a2))]);
        let x0 = b.phase(&[rng.gen_range(0.0..1.0)]);
        let f = lyapunov_field(&b, &p, 0.0, &grid, &x0, &LyapunovConfig::with_steps(2_000)).unwrap();
        if f.conjugation_asymmetry() > 1e-12 {
            violations[3] += 1;
        }
    }

    // sub-mean-value inequality for log potentials of eigenvalue clouds
    let m = 256;
    for _ in 0..cases {
        let p = potential(&mut rng);
        let g = rng.gen_range(0.0..1.0);
        let x0 = b.phase(&[rng.gen_range(0.0..1.0)]);
        let mu = empirical_dos(&b, &p, &x0, 48, g, Boundary::Periodic, &EigenOptions::default()).unwrap();
        let z = energy(&mut rng);
        let r = rng.gen_range(0.05..3.0);
        // the circle must avoid the atoms for the pointwise values to be finite
        let clear = mu.atoms.iter().all(|&(a, _)| ((z - a).norm() - r).abs() > 1e-3 * r && (z - a).norm() > 1e-9);
        if !clear {
            continue;
        }
        let mean =
            (0..m).map(|k| log_potential(&mu, z + C64::from_polar(r, 2.0 * PI * k as f64 / m as f64))).sum::<f64>()
                / m as f64;
        let slack = circle_mean_slack(&mu, z, r, m) + 1e-12 * (1.0 + mean.abs());
        if log_potential(&mu, z) > mean + slack {
            violations[4] += 1;
        }
    }

    // manifest round trips
    let tmp = tempfile::tempdir().unwrap();
    let tasks = [
        json!({"kind": "eig", "n": 128}),
        json!({"kind": "dos", "n": 96, "density_grid": {"re_min": -6, "re_max": 6, "im_min": -1, "im_max": 1, "nx": 25, "ny": 5}, "lyapunov": {"n_steps": 2000}}),
        json!({"kind": "thouless", "n": 64, "probes": [[0.0, 1.0], [7.0, 0.0]], "lyapunov": {"n_steps": 2000}}),
        json!({"kind": "field", "grid": {"re_min": -3, "re_max": 3, "im_min": -1, "im_max": 1, "nx": 9, "ny": 5}, "lyapunov": {"n_steps": 2000}}),
    ];
    for (k, t) in tasks.into_iter().enumerate() {
        let dir = tmp.path().join(k.to_string());
        std::fs::create_dir_all(&dir).unwrap();
        if !round_trip_identical(&dir, t) {
            violations[5] += 1;
        }
    }

    let names = ["determinant", "additivity", "D-conjugation", "field symmetry", "sub-mean-value", "round trip"];
    let detail = names.iter().zip(violations).map(|(n, v)| format!("{n} {v}")).collect::<Vec<_>>().join(", ");
    Verdict::new(violations.iter().all(|&v| v == 0), format!("violations: {detail}"))
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Verdict::new(false, format!("panicked: {msg}"))
    });
    v.detail += &format!(" [{:.1} s]", start.elapsed().as_secs_f64());
    v
}

#[test]
fn acceptance() {
    let cos = catch_unwind(cosine).ok();
    let need_cos = |f: fn(&Cosine) -> Verdict| {
        let cos = cos.as_ref();
        move || match cos {
            Some(c) => f(c),
            None => Verdict::new(false, "shared cosine field or Sigma(0) failed".into()),
        }
    };
    let results = [
        ("1", "free Lyapunov oracle", guarded(free_lyapunov_oracle)),
        ("2", "single-exponential plateau", guarded(plateau)),
        ("3", "eigenvalue clouds vs assembled spectrum", guarded(need_cos(bridge))),
        ("4", "exact finite oracles", guarded(finite_oracles)),
        ("5", "cosine trichotomy", guarded(need_cos(trichotomy))),
        ("6", "Thouless identities", guarded(thouless)),
        ("7", "Green's function decay", guarded(green_decay)),
        ("8", "property suites", guarded(property_suites)),
    ];
    let mut failed = Vec::new();
    println!();
    for (id, name, v) in &results {
        println!("{} criterion {id} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(*id);
        }
    }
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
