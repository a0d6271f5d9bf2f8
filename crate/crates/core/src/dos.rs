//! Density of states: empirical eigenvalue measures, logarithmic potentials,
//! the Thouless formula and the Laplacian of the Lyapunov exponent.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{LyapunovConfig, LyapunovField, PhaseSamples};
use crate::dynamics::{BaseSystem, Phase};
use crate::error::Result;
use crate::finite::{build, charpoly_eval, eigenvalues, Boundary, EigenOptions};
use crate::grid::GridSpec;
use crate::potential::Potential;
use crate::spectral::{classify_value, EnergyLabel, SpectrumSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    /// `(location, weight)` pairs.
    pub atoms: Vec<(C64, f64)>,
    pub total: f64,
}

impl EmpiricalMeasure {
    /// Uniform weights `1/n`.
    pub fn uniform(points: &[C64]) -> Self {
        let w = 1.0 / points.len() as f64;
        EmpiricalMeasure { atoms: points.iter().map(|&z| (z, w)).collect(), total: 1.0 }
    }

    pub fn translate(&self, c: C64) -> Self {
        EmpiricalMeasure { atoms: self.atoms.iter().map(|&(z, w)| (z + c, w)).collect(), total: self.total }
    }

    pub fn locations(&self) -> Vec<C64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    /// `min |z - atom|`.
    pub fn distance_to(&self, z: C64) -> f64 {
        self.atoms.iter().map(|a| (a.0 - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Normalized counting measure of the periodic truncation.
pub fn empirical_dos(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    n: usize,
    g: f64,
    boundary: Boundary,
    opts: &EigenOptions,
) -> Result<EmpiricalMeasure> {
    let op = build(base, p, x0, n, g, boundary)?;
    let r = eigenvalues(&op, opts)?;
    Ok(EmpiricalMeasure::uniform(&r.eigenvalues))
}

/// `sum w log |zeta - z|`; `-inf` at an atom.
pub fn log_potential(mu: &EmpiricalMeasure, z: C64) -> f64 {
    mu.atoms.iter().map(|&(a, w)| w * (a - z).norm().ln()).sum()
}

/// `log_potential` at every grid node, row-major.
pub fn log_potential_field(mu: &EmpiricalMeasure, grid: &GridSpec) -> Vec<f64> {
    (0..grid.len()).into_par_iter().map(|k| log_potential(mu, grid.node(k % grid.nx, k / grid.nx))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThoulessProbe {
    pub e: C64,
    /// `(1/n) log |det(H_n - E)|`.
    pub charpoly: f64,
    /// `(1/n) sum log |E - lambda_j|`.
    pub log_potential: f64,
    /// `max(L(E), g)`.
    pub l_plus: f64,
    pub l_stderr: f64,
    pub dev_charpoly_potential: f64,
    pub dev_charpoly_lplus: f64,
    pub dev_potential_lplus: f64,
    pub atom_distance: f64,
    /// Closer than 1e-3 to an eigenvalue.
    pub too_close: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThoulessReport {
    pub n: usize,
    pub g: f64,
    pub eigen_method: crate::finite::EigenMethod,
    pub probes: Vec<ThoulessProbe>,
}

impl ThoulessReport {
    pub fn max_identity_error(&self) -> f64 {
        self.probes.iter().filter(|p| !p.too_close).map(|p| p.dev_charpoly_potential).fold(0.0, f64::max)
    }

    pub fn max_limit_error(&self) -> f64 {
        self.probes
            .iter()
            .filter(|p| !p.too_close)
            .map(|p| p.dev_charpoly_lplus.max(p.dev_potential_lplus))
            .fold(0.0, f64::max)
    }
}

/// Compares the finite determinant, the eigenvalue log potential and
/// `max(L, g)` at each probe.
#[allow(clippy::too_many_arguments)]
pub fn thouless_check(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    n: usize,
    g: f64,
    probes: &[C64],
    eig: &EigenOptions,
    lyap: &LyapunovConfig,
) -> Result<ThoulessReport> {
    let op = build(base, p, x0, n, g, Boundary::Periodic)?;
    let r = eigenvalues(&op, eig)?;
    let mu = EmpiricalMeasure::uniform(&r.eigenvalues);
    let samples = PhaseSamples::new(base, p, x0, lyap)?;
    let nf = n as f64;
    let probes = probes
        .par_iter()
        .map(|&e| {
            let a = charpoly_eval(&op, e).log_abs / nf;
            let b = log_potential(&mu, e);
            let est = samples.estimate(e, 0.0);
            let c = est.value.max(g);
            let d = mu.distance_to(e);
            ThoulessProbe {
                e,
                charpoly: a,
                log_potential: b,
                l_plus: c,
                l_stderr: est.stderr,
                dev_charpoly_potential: (a - b).abs(),
                dev_charpoly_lplus: (a - c).abs(),
                dev_potential_lplus: (b - c).abs(),
                atom_distance: d,
                too_close: d < 1e-3,
            }
        })
        .collect();
    Ok(ThoulessReport { n, g, eigen_method: r.method, probes })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DosDensity {
    pub grid: GridSpec,
    pub g: f64,
    /// `(1/2 pi) Delta max(L, g)`; zero on the outer ring of nodes.
    pub density: Vec<f64>,
    /// The node is in `E_0` or its stencil touches another class.
    pub band: Vec<bool>,
    /// Non-band nodes below `-clip` that were reset to zero.
    pub clipped: usize,
    pub clip: f64,
    pub warnings: Vec<String>,
}

impl DosDensity {
    /// `sum density * dx * dy` over nodes accepted by `keep(node, is_band)`.
    pub fn mass_where(&self, keep: impl Fn(C64, bool) -> bool) -> f64 {
        let (nx, cell) = (self.grid.nx, self.grid.dx() * self.grid.dy());
        self.density
            .iter()
            .enumerate()
            .filter(|&(k, _)| keep(self.grid.node(k % nx, k / nx), self.band[k]))
            .map(|(_, d)| d * cell)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_where(|_, _| true)
    }
}

/// Five-point Laplacian of `max(L, g) / 2 pi`. Nodes whose stencil crosses
/// the kink along `{L = g}` carry the contour mass and are flagged as band.
pub fn dos_density_from_l(field: &LyapunovField, g: f64, tol0: f64) -> DosDensity {
    let grid = field.grid;
    let (dx, dy) = (grid.dx(), grid.dy());
    let lp = |i: usize, j: usize| field.at(i, j).max(g);
    let side = |i: usize, j: usize| classify_value(field.at(i, j), g, tol0).label;
    let clip = 4.0 * tol0 / (2.0 * PI * dx.min(dy).powi(2));
    let mut density = vec![0.0; grid.len()];
    let mut band = vec![false; grid.len()];
    let mut clipped = 0;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let k = grid.index(i, j);
            let lap = (lp(i + 1, j) - 2.0 * lp(i, j) + lp(i - 1, j)) / (dx * dx)
                + (lp(i, j + 1) - 2.0 * lp(i, j) + lp(i, j - 1)) / (dy * dy);
            let mut d = lap / (2.0 * PI);
            let s = side(i, j);
            band[k] = s == EnergyLabel::EZero
                || [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)].iter().any(|&(a, b)| side(a, b) != s);
            // band nodes keep their raw value: the kink's negative lobes
            // cancel against the contour mass
            if !band[k] && d < -clip {
                clipped += 1;
                d = 0.0;
            }
            density[k] = d;
        }
    }
    let mut warnings = Vec::new();
    let n_band = band.iter().filter(|&&b| b).count();
    if n_band > 0 {
        warnings.push(format!(
            "{n_band} nodes straddle the level set L = g; their density is the discretized contour measure"
        ));
    }
    if clipped > 0 {
        warnings.push(format!("{clipped} nodes below -{clip:.3e} were clipped to zero"));
    }
    DosDensity { grid, g, density, band, clipped, clip, warnings }
}

/// Version tag of the bounded-Lipschitz test dictionary.
pub const BL_DICTIONARY: &str = "bl-dict-v1";
const BL_COUNT: usize = 200;
const BL_HALF_WIDTH: f64 = 8.0;
const BL_SIGMA: f64 = 0.5;

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let (mut x, mut f) = (0.0, 1.0 / base as f64);
    while k > 0 {
        x += (k % base) as f64 * f;
        k /= base;
        f /= base as f64;
    }
    x
}

/// Centers of the dictionary bumps: Halton points in bases 2 and 3 (indices
/// 1..=200) mapped to `[-8, 8]^2`.
pub fn bl_centers() -> Vec<C64> {
    (1..=BL_COUNT)
        .map(|k| {
            let u = radical_inverse(k, 2);
            let v = radical_inverse(k, 3);
            C64::new(BL_HALF_WIDTH * (2.0 * u - 1.0), BL_HALF_WIDTH * (2.0 * v - 1.0))
        })
        .collect()
}

/// `exp(-|z - c|^2 / 2 sigma^2)` scaled to bounded-Lipschitz norm 1.
fn bump(z: C64, c: C64) -> f64 {
    let lip = (-0.5f64).exp() / BL_SIGMA;
    (-(z - c).norm_sqr() / (2.0 * BL_SIGMA * BL_SIGMA)).exp() / lip.max(1.0)
}

/// `max_f |int f d mu - int f d nu|` over the fixed bump dictionary.
pub fn bl_distance(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> f64 {
    bl_centers()
        .par_iter()
        .map(|&c| {
            let a: f64 = mu.atoms.iter().map(|&(z, w)| w * bump(z, c)).sum();
            let b: f64 = nu.atoms.iter().map(|&(z, w)| w * bump(z, c)).sum();
            (a - b).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    /// Largest distance from an atom to the sampled spectrum.
    pub hausdorff_out: f64,
    /// Largest distance from a sampled spectrum point to the atoms.
    pub hausdorff_in: f64,
    /// As `hausdorff_in`, over filled-cell centers only; `None` without cells.
    pub hausdorff_in_filled: Option<f64>,
    pub sample_step: f64,
    pub samples: usize,
}

fn directed(from: &[C64], to: &[C64]) -> f64 {
    from.par_iter().map(|&z| to.iter().map(|&w| (w - z).norm()).fold(f64::INFINITY, f64::min)).reduce(|| 0.0, f64::max)
}

/// Hausdorff distances between the atoms and `s` sampled at its grid step.
pub fn support_vs_spectrum(mu: &EmpiricalMeasure, s: &SpectrumSet) -> SupportReport {
    let step = s.grid.step();
    let pts = s.sample_points(step);
    let atoms = mu.locations();
    let filled: Vec<C64> = s.filled_cells.iter().map(|c| c.center()).collect();
    SupportReport {
        hausdorff_out: directed(&atoms, &pts),
        hausdorff_in: directed(&pts, &atoms),
        hausdorff_in_filled: (!filled.is_empty()).then(|| directed(&filled, &atoms)),
        sample_step: step,
        samples: pts.len(),
    }
}
