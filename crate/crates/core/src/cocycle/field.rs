//! Lyapunov exponent sampled over a rectangle of complex energies.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use super::lyapunov::{LyapunovConfig, PhaseSamples};
use crate::dynamics::{BaseSystem, Phase};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::io::{fmt_f64, write_grid};
use crate::potential::Potential;

/// `L(E) = L_0(E)` on every grid node. `g` is carried as metadata only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovField {
    pub grid: GridSpec,
    pub g: f64,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub converged: Vec<bool>,
    pub config: LyapunovConfig,
    /// Whether the potential is real-valued (conjugation symmetry expected).
    pub real_potential: bool,
}

impl LyapunovField {
    /// Builds a field from a closure, e.g. a closed-form oracle.
    pub fn from_fn(grid: GridSpec, g: f64, f: impl Fn(C64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|k| f(grid.node(k % grid.nx, k / grid.nx))).collect();
        let n = values.len();
        LyapunovField {
            grid,
            g,
            values,
            stderr: vec![0.0; n],
            converged: vec![true; n],
            config: LyapunovConfig::default(),
            real_potential: true,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().cloned().fold(0.0, f64::max)
    }

    pub fn unconverged_count(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    /// Bilinear interpolation of `L`.
    pub fn interpolate(&self, z: C64) -> Option<f64> {
        self.grid.interpolate(&self.values, z)
    }

    /// Largest `|L(E) - L(conj E)|` over node pairs mirrored about the real axis.
    pub fn conjugation_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.ny {
            let mirror = C64::new(0.0, -self.grid.node(0, j).im);
            let Some(j2) = self.row_of(mirror.im) else { continue };
            for i in 0..self.grid.nx {
                worst = worst.max((self.at(i, j) - self.at(i, j2)).abs());
            }
        }
        worst
    }

    fn row_of(&self, im: f64) -> Option<usize> {
        let t = (im - self.grid.im_min) / self.grid.dy();
        let j = t.round();
        (j >= 0.0 && (j as usize) < self.grid.ny && (t - j).abs() < 1e-9).then_some(j as usize)
    }

    /// CSV with columns `re,im,L,stderr,flag` (`flag = 1` marks non-convergence).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,L,stderr,flag")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.index(i, j);
                let z = self.grid.node(i, j);
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_f64(z.re),
                    fmt_f64(z.im),
                    fmt_f64(self.values[k]),
                    fmt_f64(self.stderr[k]),
                    u8::from(!self.converged[k])
                )?;
            }
        }
        Ok(())
    }

    /// Binary grid with layers `L`, `stderr`, `flag`.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let flags: Vec<f64> = self.converged.iter().map(|&c| if c { 0.0 } else { 1.0 }).collect();
        write_grid(w, &self.grid, &[("L", &self.values), ("stderr", &self.stderr), ("flag", &flags)])
    }
}

/// `L(E)` at every node of `grid`. Nodes are independent and evaluated in
/// parallel; the result does not depend on scheduling.
pub fn lyapunov_field(
    base: &BaseSystem,
    p: &Potential,
    g: f64,
    grid: &GridSpec,
    x0: &Phase,
    cfg: &LyapunovConfig,
) -> Result<LyapunovField> {
    grid.validate()?;
    let samples = PhaseSamples::new(base, p, x0, cfg)?;
    let est: Vec<_> =
        (0..grid.len()).into_par_iter().map(|k| samples.estimate(grid.node(k % grid.nx, k / grid.nx), 0.0)).collect();
    Ok(LyapunovField {
        grid: *grid,
        g,
        values: est.iter().map(|e| e.value).collect(),
        stderr: est.iter().map(|e| e.stderr).collect(),
        converged: est.iter().map(|e| e.converged).collect(),
        config: *cfg,
        real_potential: p.is_real_valued(),
    })
}
