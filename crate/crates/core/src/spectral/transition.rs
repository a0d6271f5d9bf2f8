//! Coupling thresholds between the real-spectrum and complex-spectrum regimes.

use serde::{Deserialize, Serialize};

use super::check_field;
use crate::cocycle::LyapunovField;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `g < min L` on the real axis: the spectrum is `Sigma(0)`.
    AllReal,
    /// `g > max L` on `Sigma(0)`: no real spectrum remains.
    AllComplex,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    /// Minimum of `L` over the real axis of the window.
    pub g_lower: f64,
    /// Maximum of `L` over the real-axis nodes inside `Sigma(0)`.
    pub g_upper: f64,
    pub tol0: f64,
    pub warnings: Vec<String>,
}

impl TransitionReport {
    /// `AllReal` wins when both thresholds are within `tol0`.
    pub fn regime(&self, g: f64) -> Regime {
        if g < self.g_lower - self.tol0 {
            Regime::AllReal
        } else if g > self.g_upper + self.tol0 {
            Regime::AllComplex
        } else if g <= self.g_lower + self.tol0 {
            Regime::AllReal
        } else if g >= self.g_upper - self.tol0 {
            Regime::AllComplex
        } else {
            Regime::Mixed
        }
    }

    /// Signed distances `(g - g_lower, g_upper - g)`.
    pub fn margins(&self, g: f64) -> (f64, f64) {
        (g - self.g_lower, self.g_upper - g)
    }
}

pub fn transition_report(field: &LyapunovField, sigma0: &[[f64; 2]], tol0: f64) -> Result<TransitionReport> {
    check_field(field, tol0)?;
    let grid = field.grid;
    if grid.im_min > 0.0 || grid.im_max < 0.0 {
        return Err(Error::InvalidArgument("field window must contain the real axis".into()));
    }
    if sigma0.is_empty() {
        return Err(Error::InvalidArgument("Sigma(0) is empty".into()));
    }
    let real: Vec<(f64, f64)> = (0..grid.nx)
        .filter_map(|i| {
            let x = grid.node(i, 0).re;
            field.interpolate(C64::new(x, 0.0)).map(|l| (x, l))
        })
        .collect();
    let g_lower = real.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut g_upper = f64::NEG_INFINITY;
    let mut warnings = Vec::new();
    for &(x, l) in &real {
        if sigma0.iter().any(|&[a, b]| a <= x && x <= b) {
            g_upper = g_upper.max(l);
        }
    }
    if !g_upper.is_finite() {
        // no node falls inside Sigma(0): fall back to interpolated midpoints
        warnings.push("no field node lies in Sigma(0); g_upper uses interpolated interval midpoints".into());
        for &[a, b] in sigma0 {
            if let Some(l) = field.interpolate(C64::new(0.5 * (a + b), 0.0)) {
                g_upper = g_upper.max(l);
            }
        }
    }
    let jumps = real.windows(2).filter(|w| (w[1].1 - w[0].1).abs() > 10.0 * tol0).count();
    if jumps > 0 {
        warnings.push(format!("{jumps} jumps larger than 10 tol0 between neighbouring real-axis nodes"));
    }
    let lo = sigma0[0][0];
    let hi = sigma0[sigma0.len() - 1][1];
    if lo - grid.re_min < 2.0 || grid.re_max - hi < 2.0 {
        warnings.push("field window extends less than 2 beyond Sigma(0)".into());
    }
    if !g_upper.is_finite() {
        return Err(Error::InvalidArgument("no Sigma(0) point inside the field window".into()));
    }
    Ok(TransitionReport { g_lower, g_upper, tol0, warnings })
}
