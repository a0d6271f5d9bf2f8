//! Task execution. Every task returns its artifacts in memory; nothing is
//! written until the whole task has succeeded.

use hn_spectra::cocycle::{lyapunov_field, LyapunovField, PhaseSamples};
use hn_spectra::dos::{dos_density_from_l, BL_DICTIONARY};
use hn_spectra::finite::{write_eigen_csv, EigenSidecar};
use hn_spectra::io::{fmt_f64, write_grid};
use hn_spectra::resolvent::decay_fit;
use hn_spectra::spectral::{default_tol0, Sigma0Report};
use hn_spectra::{
    assemble_spectrum, build, count_contours, dirichlet_g_invariance, eigenvalues, empirical_dos, green_forward,
    green_hyperbolic, lyapunov, real_spectrum_sigma0, thouless_check, transition_report, Error, LyapunovEstimate,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{GreenChoice, RunConfig, Task};
use crate::CliError;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn json_artifact(name: &str, value: &impl Serialize) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    Artifact { name: name.into(), bytes }
}

fn numeric(module: &'static str) -> impl Fn(Error) -> CliError {
    move |error| match error {
        Error::InvalidArgument(_)
        | Error::BadRange { .. }
        | Error::PhaseMismatch { .. }
        | Error::DenseCapExceeded { .. }
        | Error::NotRealValued => CliError::Config(error.to_string()),
        _ => CliError::Numeric { module, error },
    }
}

fn field_artifacts(field: &LyapunovField) -> Result<Vec<Artifact>, CliError> {
    let mut csv = Vec::new();
    field.write_csv(&mut csv).map_err(numeric("cocycle_engine"))?;
    let mut bin = Vec::new();
    field.write_binary(&mut bin).map_err(numeric("cocycle_engine"))?;
    let summary = json!({
        "grid": field.grid,
        "g": field.g,
        "max_stderr": field.max_stderr(),
        "unconverged": field.unconverged_count(),
        "conjugation_asymmetry": field.real_potential.then(|| field.conjugation_asymmetry()),
    });
    Ok(vec![
        Artifact { name: "field.csv".into(), bytes: csv },
        Artifact { name: "field.bin".into(), bytes: bin },
        json_artifact("field.json", &summary),
    ])
}

/// Runs the task, returning artifacts and the config with every
/// data-dependent default filled in.
pub fn run_task(cfg: &RunConfig) -> Result<(Vec<Artifact>, RunConfig), CliError> {
    let mut resolved = cfg.clone();
    let m = &cfg.model;
    let (base, p, g, x0) = (&m.base, &m.potential, m.g, m.x0());
    let mut out = Vec::new();
    match &cfg.task {
        Task::Lyapunov { energies, lyapunov } => {
            let samples = PhaseSamples::new(base, p, &x0, lyapunov).map_err(numeric("cocycle_engine"))?;
            let est: Vec<LyapunovEstimate> = energies.iter().map(|&e| samples.estimate(e, g)).collect();
            let mut csv = String::from("re,im,L,stderr,half,converged\n");
            for (e, r) in energies.iter().zip(&est) {
                csv += &format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(e.re),
                    fmt_f64(e.im),
                    fmt_f64(r.value),
                    fmt_f64(r.stderr),
                    fmt_f64(r.half_value),
                    r.converged as u8
                );
            }
            out.push(Artifact { name: "lyapunov.csv".into(), bytes: csv.into_bytes() });
            let rows: Vec<_> = energies.iter().zip(&est).map(|(e, r)| json!({"e": e, "estimate": r})).collect();
            out.push(json_artifact("lyapunov.json", &json!({ "g": g, "estimates": rows })));
        }
        Task::Field { grid, lyapunov } => {
            let field = lyapunov_field(base, p, g, grid, &x0, lyapunov).map_err(numeric("cocycle_engine"))?;
            out.extend(field_artifacts(&field)?);
        }
        Task::Spectrum { grid, lyapunov, sigma0, tol0 } | Task::Transition { grid, lyapunov, sigma0, tol0 } => {
            let field = lyapunov_field(base, p, g, grid, &x0, lyapunov).map_err(numeric("cocycle_engine"))?;
            let tol0 = tol0.unwrap_or_else(|| default_tol0(&field));
            let s0: Option<Sigma0Report> = match sigma0 {
                Some(s) => Some(real_spectrum_sigma0(base, p, &x0, s).map_err(numeric("spectral_theory"))?),
                None => None,
            };
            let intervals = s0.as_ref().map(|r| r.intervals.clone()).unwrap_or_default();
            out.extend(field_artifacts(&field)?);
            if let Some(r) = &s0 {
                out.push(json_artifact("sigma0.json", r));
            }
            if matches!(cfg.task, Task::Spectrum { .. }) {
                let set = assemble_spectrum(&field, g, &intervals, tol0).map_err(numeric("spectral_theory"))?;
                out.push(json_artifact("contours.json", &count_contours(&set)));
                out.push(json_artifact("spectrum.json", &set));
            } else {
                let tr = transition_report(&field, &intervals, tol0).map_err(numeric("spectral_theory"))?;
                let (below, above) = tr.margins(g);
                out.push(json_artifact(
                    "transition.json",
                    &json!({
                        "g": g,
                        "regime": tr.regime(g),
                        "margin_lower": below,
                        "margin_upper": above,
                        "report": tr,
                    }),
                ));
            }
            if let Task::Spectrum { tol0: t, .. } | Task::Transition { tol0: t, .. } = &mut resolved.task {
                *t = Some(tol0);
            }
        }
        Task::Eig { n, boundary, eigen } => {
            let op = build(base, p, &x0, *n, g, *boundary).map_err(numeric("finite_spectra"))?;
            let r = eigenvalues(&op, eigen).map_err(numeric("finite_spectra"))?;
            let mut csv = Vec::new();
            write_eigen_csv(&mut csv, &r).map_err(numeric("finite_spectra"))?;
            out.push(Artifact { name: "eigenvalues.csv".into(), bytes: csv });
            out.push(json_artifact("eigenvalues.json", &EigenSidecar::new(base, p, &x0, &op, &r)));
        }
        Task::Dos { n, boundary, eigen, density_grid, lyapunov, tol0 } => {
            let mu = empirical_dos(base, p, &x0, *n, g, *boundary, eigen).map_err(numeric("dos_thouless"))?;
            let mut csv = String::from("re,im,weight\n");
            for (z, w) in &mu.atoms {
                csv += &format!("{},{},{}\n", fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*w));
            }
            out.push(Artifact { name: "atoms.csv".into(), bytes: csv.into_bytes() });
            let mut report = json!({ "n": n, "g": g, "total": mu.total, "bl_dictionary": BL_DICTIONARY });
            if let Some(grid) = density_grid {
                let field = lyapunov_field(base, p, 0.0, grid, &x0, lyapunov).map_err(numeric("cocycle_engine"))?;
                let t = tol0.unwrap_or_else(|| default_tol0(&field));
                let d = dos_density_from_l(&field, g, t);
                let band: Vec<f64> = d.band.iter().map(|&b| b as u8 as f64).collect();
                let mut bin = Vec::new();
                write_grid(&mut bin, grid, &[("density", &d.density), ("band", &band)])
                    .map_err(numeric("dos_thouless"))?;
                out.push(Artifact { name: "density.bin".into(), bytes: bin });
                report["density"] = json!({
                    "tol0": t,
                    "total_mass": d.total_mass(),
                    "band_mass": d.mass_where(|_, b| b),
                    "clipped": d.clipped,
                    "clip": d.clip,
                    "warnings": d.warnings,
                });
                if let Task::Dos { tol0, .. } = &mut resolved.task {
                    *tol0 = Some(t);
                }
            }
            out.push(json_artifact("dos.json", &report));
        }
        Task::Thouless { n, probes, eigen, lyapunov } => {
            let r = thouless_check(base, p, &x0, *n, g, probes, eigen, lyapunov).map_err(numeric("dos_thouless"))?;
            out.push(json_artifact(
                "thouless.json",
                &json!({
                    "max_identity_error": r.max_identity_error(),
                    "max_limit_error": r.max_limit_error(),
                    "report": r,
                }),
            ));
        }
        Task::Green { energy, w, regime, green } => {
            let choice = match regime {
                GreenChoice::Auto => {
                    let est = lyapunov(base, p, *energy, 0.0, &x0, &green.lyapunov).map_err(numeric("resolvent"))?;
                    if est.value < g {
                        GreenChoice::Forward
                    } else {
                        GreenChoice::Hyperbolic
                    }
                }
                c => *c,
            };
            let gw = match choice {
                GreenChoice::Forward => green_forward(base, p, &x0, *energy, g, *w, green),
                _ => green_hyperbolic(base, p, &x0, *energy, g, *w, green),
            }
            .map_err(numeric("resolvent"))?;
            let mut csv = Vec::new();
            gw.write_csv(&mut csv).map_err(numeric("resolvent"))?;
            out.push(Artifact { name: "green.csv".into(), bytes: csv });
            let (right, left) = gw.residuals();
            let fit = decay_fit(&gw);
            out.push(json_artifact(
                "green.json",
                &json!({
                    "regime": gw.regime,
                    "e": gw.e,
                    "g": gw.g,
                    "w": gw.w,
                    "lyapunov": gw.lyapunov,
                    "lyapunov_stderr": gw.lyapunov_stderr,
                    "residual_right": right,
                    "residual_left": left,
                    "underflow": gw.underflow,
                    "fit": fit.as_ref().ok(),
                    "fit_error": fit.as_ref().err().map(|e| e.to_string()),
                }),
            ));
            if let Task::Green { regime, .. } = &mut resolved.task {
                *regime = choice;
            }
        }
        Task::DirichletCheck { n, g1, g2, eigen } => {
            let r = dirichlet_g_invariance(base, p, &x0, *n, *g1, *g2, eigen).map_err(numeric("finite_spectra"))?;
            out.push(json_artifact("dirichlet.json", &r));
        }
    }
    Ok((out, resolved))
}
