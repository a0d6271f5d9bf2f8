//! The real spectrum at zero coupling as the complement of uniform hyperbolicity.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{uh_test, UhConfig, UhVerdict};
use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::potential::Potential;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sigma0Config {
    pub re_min: f64,
    pub re_max: f64,
    pub n_points: usize,
    /// Endpoint bisection stops at this bracket width.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub uh: UhConfig,
}

fn default_resolution() -> f64 {
    1e-3
}

impl Sigma0Config {
    /// Scan range `[-(sup|v| + 2.5), sup|v| + 2.5]` at spacing 0.01.
    pub fn for_potential(p: &Potential, base: &BaseSystem) -> Self {
        let r = p.sup_bound(base) + 2.5;
        Sigma0Config {
            re_min: -r,
            re_max: r,
            n_points: (2.0 * r / 0.01).ceil() as usize + 1,
            resolution: default_resolution(),
            uh: UhConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sigma0Report {
    /// Disjoint sorted closed intervals; inconclusive energies are included.
    pub intervals: Vec<[f64; 2]>,
    pub points: usize,
    pub not_uh: usize,
    pub inconclusive: usize,
}

impl Sigma0Report {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&[a, b]| a <= x && x <= b)
    }

    /// Distance from `x` to the nearest interval.
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&[a, b]| {
                if x < a {
                    a - x
                } else if x > b {
                    x - b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scans the real axis with the uniform hyperbolicity test.
pub fn real_spectrum_sigma0(base: &BaseSystem, p: &Potential, x0: &Phase, cfg: &Sigma0Config) -> Result<Sigma0Report> {
    if !p.is_real_valued() {
        return Err(Error::NotRealValued);
    }
    if !(cfg.re_min < cfg.re_max) || cfg.n_points < 2 || !(cfg.resolution > 0.0) {
        return Err(Error::InvalidArgument("sigma0 scan needs re_min < re_max, n_points >= 2, resolution > 0".into()));
    }
    let xs: Vec<f64> = (0..cfg.n_points)
        .map(|k| cfg.re_min + (cfg.re_max - cfg.re_min) * k as f64 / (cfg.n_points - 1) as f64)
        .collect();
    let in_set = |x: f64| -> Result<(bool, UhVerdict)> {
        let v = uh_test(base, p, C64::new(x, 0.0), x0, &cfg.uh)?.verdict;
        Ok((v != UhVerdict::UniformlyHyperbolic, v))
    };
    let verdicts: Vec<(bool, UhVerdict)> = xs.par_iter().map(|&x| in_set(x)).collect::<Result<_>>()?;
    let not_uh = verdicts.iter().filter(|v| v.1 == UhVerdict::NotUh).count();
    let inconclusive = verdicts.iter().filter(|v| v.1 == UhVerdict::Inconclusive).count();

    // runs of non-UH points
    let mut runs = Vec::new();
    let mut k = 0;
    while k < xs.len() {
        if verdicts[k].0 {
            let start = k;
            while k + 1 < xs.len() && verdicts[k + 1].0 {
                k += 1;
            }
            runs.push((start, k));
        }
        k += 1;
    }
    // bisect each edge between a UH node and a non-UH node
    let refine = |mut outside: f64, mut inside: f64| -> Result<f64> {
        while (outside - inside).abs() > cfg.resolution {
            let mid = 0.5 * (outside + inside);
            if in_set(mid)?.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    };
    let intervals = runs
        .par_iter()
        .map(|&(a, b)| -> Result<[f64; 2]> {
            let lo = if a == 0 { xs[0] } else { refine(xs[a - 1], xs[a])? };
            let hi = if b + 1 == xs.len() { xs[b] } else { refine(xs[b + 1], xs[b])? };
            Ok([lo, hi])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sigma0Report { intervals, points: xs.len(), not_uh, inconclusive })
}
