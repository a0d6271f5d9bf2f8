//! Finite truncations: construction, eigenvalues, characteristic polynomials.

mod aberth;
mod band;
mod dense;
pub mod matching;
mod operator;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::io::write_points_csv;
use crate::potential::Potential;

pub use matching::{match_eigenvalues, sort_lex, MatchMethod, Matching};
pub use operator::{build, Boundary, FiniteOperator};

pub(crate) use band::BandLu;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Hessenberg reduction and shifted QR.
    Dense,
    /// Aberth iteration on the transfer-matrix characteristic polynomial.
    Structured,
    /// Dense up to `AUTO_DENSE_MAX`, structured above.
    Auto,
}

pub const AUTO_DENSE_MAX: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    pub method: EigenMethod,
    pub dense_cap: usize,
    /// QR iterations allowed per unit of matrix size.
    pub max_iter_factor: usize,
    pub max_sweeps: usize,
    pub backward_error: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            method: EigenMethod::Auto,
            dense_cap: 4096,
            max_iter_factor: 30,
            max_sweeps: 500,
            backward_error: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Sorted lexicographically by `(re, im)`.
    pub eigenvalues: Vec<C64>,
    /// `max ||(H - l) x|| / ||H||_F` over inverse-iteration eigenvectors.
    pub backward_error: Option<f64>,
    pub method: EigenMethod,
    /// `|sum l - tr H| / max(|tr H|, ||H||_F)`.
    pub trace_error: f64,
    /// `|sum log|l| - log|det H||`.
    pub log_det_error: f64,
}

pub fn eigenvalues(op: &FiniteOperator, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.n();
    if n > opts.dense_cap {
        return Err(Error::DenseCapExceeded { n, cap: opts.dense_cap });
    }
    let method = match opts.method {
        EigenMethod::Auto if n <= AUTO_DENSE_MAX => EigenMethod::Dense,
        EigenMethod::Auto => EigenMethod::Structured,
        m => m,
    };
    let mut ev = match method {
        EigenMethod::Dense => dense::dense_eigenvalues(op.to_dense(), n, opts.max_iter_factor * n)
            .map_err(|unconverged| Error::EigenNonConvergence { unconverged })?,
        _ => {
            let (z, failed) = aberth::aberth(op, opts.max_sweeps);
            if !failed.is_empty() {
                return Err(Error::EigenNonConvergence { unconverged: failed });
            }
            z
        }
    };
    sort_lex(&mut ev);
    let norm = op.frobenius();
    let tr = op.trace();
    let sum: C64 = ev.iter().sum();
    let trace_error = (sum - tr).norm() / tr.norm().max(norm);
    let det = charpoly_eval(op, C64::new(0.0, 0.0));
    let log_det_error =
        if det.log_abs.is_finite() { (ev.iter().map(|l| l.norm().ln()).sum::<f64>() - det.log_abs).abs() } else { 0.0 };
    let backward_error = opts.backward_error.then(|| backward_error(op, &ev));
    Ok(EigenResult { eigenvalues: ev, backward_error, method, trace_error, log_det_error })
}

/// Largest relative residual of inverse-iteration eigenvectors, `O(n)` per
/// eigenvalue through the banded factorization.
pub fn backward_error(op: &FiniteOperator, ev: &[C64]) -> f64 {
    use rayon::prelude::*;
    let n = op.n();
    let norm = op.frobenius();
    let floor = f64::EPSILON * norm;
    ev.par_iter()
        .map(|&l| {
            let lu = BandLu::factor(op, l, floor);
            let mut x: Vec<C64> = (0..n).map(|k| C64::new(1.0, 0.5 * ((k * 37 % 17) as f64 / 17.0))).collect();
            for _ in 0..3 {
                x = lu.solve(&x);
                let s = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(s.is_finite() && s > 0.0) {
                    return f64::INFINITY;
                }
                x.iter_mut().for_each(|z| *z /= s);
            }
            let hx = op.matvec(&x);
            hx.iter().zip(&x).map(|(h, v)| (h - l * v).norm_sqr()).sum::<f64>().sqrt() / norm
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub log_abs: f64,
    pub arg: f64,
}

/// `log |det(H - E)|` and its argument from a pivoted banded factorization.
/// An exactly singular pivot gives `log_abs = -inf`.
pub fn charpoly_eval(op: &FiniteOperator, e: C64) -> CharPoly {
    let (log_abs, arg) = BandLu::factor(op, e, 0.0).log_det();
    CharPoly { log_abs, arg }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    pub n: usize,
    pub g1: f64,
    pub g2: f64,
    pub max_distance: f64,
    pub total_distance: f64,
    pub match_method: MatchMethod,
    /// `log10(n * eps * e^{n |g1 - g2|})`: the scale of the rounding
    /// amplification along the similarity `diag(e^{-k g})`.
    pub conditioning_log10: f64,
    pub eigen_method: EigenMethod,
}

/// Dirichlet spectra at two couplings, paired by `match_eigenvalues`.
pub fn dirichlet_g_invariance(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    n: usize,
    g1: f64,
    g2: f64,
    opts: &EigenOptions,
) -> Result<DirichletReport> {
    let a = eigenvalues(&build(base, p, x0, n, g1, Boundary::Dirichlet)?, opts)?;
    let b = eigenvalues(&build(base, p, x0, n, g2, Boundary::Dirichlet)?, opts)?;
    let m = match_eigenvalues(&a.eigenvalues, &b.eigenvalues, 1e-8);
    let nf = n as f64;
    Ok(DirichletReport {
        n,
        g1,
        g2,
        max_distance: m.max_distance,
        total_distance: m.total_distance,
        match_method: m.method,
        conditioning_log10: (nf * f64::EPSILON).log10() + nf * (g1 - g2).abs() / std::f64::consts::LN_10,
        eigen_method: a.method,
    })
}

/// JSON sidecar describing an eigenvalue cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSidecar {
    pub n: usize,
    pub g: f64,
    pub boundary: Boundary,
    pub base: BaseSystem,
    pub potential: Potential,
    pub phase: Vec<f64>,
    pub method: EigenMethod,
    pub backward_error: Option<f64>,
    pub trace_error: f64,
    pub log_det_error: f64,
    /// Set for the i.i.d. baseline, which is not strictly ergodic.
    pub contrast_only: bool,
}

impl EigenSidecar {
    pub fn new(base: &BaseSystem, p: &Potential, x0: &Phase, op: &FiniteOperator, r: &EigenResult) -> Self {
        EigenSidecar {
            n: op.n(),
            g: op.g,
            boundary: op.boundary,
            base: *base,
            potential: p.clone(),
            phase: x0.coords(),
            method: r.method,
            backward_error: r.backward_error,
            trace_error: r.trace_error,
            log_det_error: r.log_det_error,
            contrast_only: !base.is_strictly_ergodic(),
        }
    }
}

/// Eigenvalues as `re,im` CSV.
pub fn write_eigen_csv<W: Write>(w: W, r: &EigenResult) -> Result<()> {
    write_points_csv(w, &r.eigenvalues)
}
