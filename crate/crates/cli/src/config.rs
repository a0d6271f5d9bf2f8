//! Run configuration: parsing, overrides and validation.

use std::path::PathBuf;

use hn_spectra::spectral::Sigma0Config;
use hn_spectra::{BaseSystem, Boundary, EigenOptions, GreenConfig, GridSpec, LyapunovConfig, Phase, Potential, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub task: Task,
    /// Worker threads; 0 lets the runtime choose. `HN_SPECTRA_THREADS` wins.
    #[serde(default)]
    pub threads: usize,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub base: BaseSystem,
    pub potential: Potential,
    #[serde(default)]
    pub g: f64,
    /// Starting phase coordinates.
    #[serde(default)]
    pub phase: Vec<f64>,
}

impl Model {
    pub fn x0(&self) -> Phase {
        self.base.phase(&self.phase)
    }
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GreenChoice {
    #[default]
    Auto,
    Forward,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Lyapunov {
        energies: Vec<C64>,
        #[serde(default)]
        lyapunov: LyapunovConfig,
    },
    Field {
        grid: GridSpec,
        #[serde(default)]
        lyapunov: LyapunovConfig,
    },
    Spectrum {
        grid: GridSpec,
        #[serde(default)]
        lyapunov: LyapunovConfig,
        #[serde(default)]
        sigma0: Option<Sigma0Config>,
        #[serde(default)]
        tol0: Option<f64>,
    },
    Transition {
        grid: GridSpec,
        #[serde(default)]
        lyapunov: LyapunovConfig,
        #[serde(default)]
        sigma0: Option<Sigma0Config>,
        #[serde(default)]
        tol0: Option<f64>,
    },
    Eig {
        n: usize,
        #[serde(default = "periodic")]
        boundary: Boundary,
        #[serde(default)]
        eigen: EigenOptions,
    },
    Dos {
        n: usize,
        #[serde(default = "periodic")]
        boundary: Boundary,
        #[serde(default)]
        eigen: EigenOptions,
        /// Also differentiate a Lyapunov field on this grid.
        #[serde(default)]
        density_grid: Option<GridSpec>,
        #[serde(default)]
        lyapunov: LyapunovConfig,
        #[serde(default)]
        tol0: Option<f64>,
    },
    Thouless {
        n: usize,
        probes: Vec<C64>,
        #[serde(default)]
        eigen: EigenOptions,
        #[serde(default)]
        lyapunov: LyapunovConfig,
    },
    Green {
        energy: C64,
        w: usize,
        #[serde(default)]
        regime: GreenChoice,
        #[serde(default)]
        green: GreenConfig,
    },
    DirichletCheck {
        n: usize,
        g1: f64,
        g2: f64,
        #[serde(default)]
        eigen: EigenOptions,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Lyapunov { .. } => "lyapunov",
            Task::Field { .. } => "field",
            Task::Spectrum { .. } => "spectrum",
            Task::Transition { .. } => "transition",
            Task::Eig { .. } => "eig",
            Task::Dos { .. } => "dos",
            Task::Thouless { .. } => "thouless",
            Task::Green { .. } => "green",
            Task::DirichletCheck { .. } => "dirichlet-check",
        }
    }
}

/// Sets `path` (dot separated) in `doc` to `raw`, read as JSON when it parses
/// and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("override `{path}`: `{}` is not an object", keys[..i].join(".")))
        })?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Reads a config or a manifest (whose embedded config is used).
pub fn load(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let is_manifest = doc.get("manifest_version").is_some();
    let cfg: RunConfig = if !is_manifest && overrides.is_empty() {
        // parse the original text so diagnostics point into the user's file
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?
    } else {
        if is_manifest {
            doc =
                doc.get("config").cloned().ok_or_else(|| CliError::Config("manifest has no embedded config".into()))?;
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let text = serde_json::to_string_pretty(&doc).expect("value serializes");
        serde_json::from_str(&text).map_err(|e| {
            let origin = if is_manifest { "embedded config" } else { "config after overrides" };
            CliError::Config(format!("{origin}: {e}\n{text}"))
        })?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg_err = |e: hn_spectra::Error| CliError::Config(e.to_string());
        let m = &self.model;
        m.base.validate().map_err(cfg_err)?;
        m.potential.check_compatible(&m.base).map_err(cfg_err)?;
        check(m.g.is_finite() && m.g >= 0.0, || format!("model.g must be finite and non-negative, got {}", m.g))?;
        check(m.phase.iter().all(|x| x.is_finite()), || "model.phase must be finite".into())?;
        let lyap = |c: &LyapunovConfig| c.validate().map_err(cfg_err);
        let size = |n: usize, e: &EigenOptions| {
            check(n >= 3, || format!("task.n must be at least 3, got {n}"))?;
            check(n <= e.dense_cap, || format!("task.n = {n} exceeds eigen.dense_cap = {}", e.dense_cap))
        };
        match &self.task {
            Task::Lyapunov { energies, lyapunov } => {
                check(!energies.is_empty(), || "task.energies is empty".into())?;
                lyap(lyapunov)?;
            }
            Task::Field { grid, lyapunov } => {
                grid.validate().map_err(cfg_err)?;
                lyap(lyapunov)?;
            }
            Task::Spectrum { grid, lyapunov, sigma0, tol0 } | Task::Transition { grid, lyapunov, sigma0, tol0 } => {
                grid.validate().map_err(cfg_err)?;
                lyap(lyapunov)?;
                if let Some(t) = tol0 {
                    check(*t > 0.0, || format!("task.tol0 must be positive, got {t}"))?;
                }
                if let Some(s) = sigma0 {
                    check(s.re_min < s.re_max && s.n_points >= 2 && s.resolution > 0.0, || {
                        "task.sigma0 needs re_min < re_max, n_points >= 2, resolution > 0".into()
                    })?;
                }
                if matches!(self.task, Task::Transition { .. }) {
                    check(m.potential.is_real_valued(), || "transition needs a real-valued potential".into())?;
                    check(grid.im_min <= 0.0 && grid.im_max >= 0.0, || {
                        "transition grid must contain the real axis".into()
                    })?;
                }
            }
            Task::Eig { n, eigen, .. } => size(*n, eigen)?,
            Task::Dos { n, eigen, density_grid, lyapunov, .. } => {
                size(*n, eigen)?;
                if let Some(gr) = density_grid {
                    gr.validate().map_err(cfg_err)?;
                    lyap(lyapunov)?;
                }
            }
            Task::Thouless { n, probes, eigen, lyapunov } => {
                size(*n, eigen)?;
                check(!probes.is_empty(), || "task.probes is empty".into())?;
                lyap(lyapunov)?;
            }
            Task::Green { w, green, .. } => {
                check(*w >= 2, || format!("task.w must be at least 2, got {w}"))?;
                lyap(&green.lyapunov)?;
            }
            Task::DirichletCheck { n, g1, g2, eigen } => {
                size(*n, eigen)?;
                check(*g1 >= 0.0 && *g2 >= 0.0, || "task.g1 and task.g2 must be non-negative".into())?;
            }
        }
        Ok(())
    }

    /// Fills data-independent defaults so the manifest records them.
    pub fn resolve(&mut self) {
        let (p, base) = (&self.model.potential, &self.model.base);
        if let Task::Spectrum { sigma0, .. } | Task::Transition { sigma0, .. } = &mut self.task {
            if sigma0.is_none() && p.is_real_valued() {
                *sigma0 = Some(Sigma0Config::for_potential(p, base));
            }
        }
    }
}
