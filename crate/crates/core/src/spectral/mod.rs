//! The infinite-volume spectrum from level sets of the Lyapunov exponent.

mod assemble;
mod contour;
mod sigma0;
mod transition;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cocycle::LyapunovField;
use crate::error::{Error, Result};

pub use assemble::{assemble_spectrum, FilledCell, SpectrumSet};
pub use contour::{count_contours, marching_squares, ContourCount, ContourKind};
pub use sigma0::{real_spectrum_sigma0, Sigma0Config, Sigma0Report};
pub use transition::{transition_report, Regime, TransitionReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyLabel {
    #[serde(rename = "E_minus")]
    EMinus,
    #[serde(rename = "E_zero")]
    EZero,
    #[serde(rename = "E_plus")]
    EPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyClass {
    pub label: EnergyLabel,
    /// `|L(E) - g|`.
    pub margin: f64,
}

/// `max(3 * max stderr, 1e-3)`.
pub fn default_tol0(field: &LyapunovField) -> f64 {
    (3.0 * field.max_stderr()).max(1e-3)
}

pub(crate) fn check_field(field: &LyapunovField, tol0: f64) -> Result<()> {
    let noise = field.max_stderr();
    if !(tol0 > 2.0 * noise) {
        return Err(Error::ToleranceTooSmall { tol0, noise });
    }
    let count = field.unconverged_count();
    if count > 0 {
        return Err(Error::UnresolvedField { count });
    }
    Ok(())
}

pub fn classify_value(l: f64, g: f64, tol0: f64) -> EnergyClass {
    let label = if l < g - tol0 {
        EnergyLabel::EMinus
    } else if l > g + tol0 {
        EnergyLabel::EPlus
    } else {
        EnergyLabel::EZero
    };
    EnergyClass { label, margin: (l - g).abs() }
}

/// Per-node labels, row-major like the field.
pub fn classify(field: &LyapunovField, g: f64, tol0: f64) -> Result<Vec<EnergyClass>> {
    check_field(field, tol0)?;
    Ok(field.values.iter().map(|&l| classify_value(l, g, tol0)).collect())
}

/// `E/2 + sqrt(E^2 - 4)/2` on the branch with modulus at least 1.
pub fn joukowski_root(e: C64) -> C64 {
    let s = (e * e - 4.0).sqrt() * 0.5;
    let w = e * 0.5 + s;
    if w.norm() >= 1.0 {
        w
    } else {
        e * 0.5 - s
    }
}

/// Lyapunov exponent of the free operator, `log |E/2 + sqrt(E^2 - 4)/2|`.
pub fn oracle_free_l(e: C64) -> f64 {
    joukowski_root(e).norm().ln().max(0.0)
}

/// Lyapunov exponent for `v(x) = lambda e^{2 pi i x}`:
/// `max(log |E/2 + sqrt(E^2 - 4)/2|, log |lambda|)`.
pub fn oracle_single_exp_l(e: C64, lambda: C64) -> f64 {
    oracle_free_l(e).max(lambda.norm().ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn oracles() {
        assert_eq!(oracle_free_l(C64::new(2.0, 0.0)), 0.0);
        let want = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((oracle_free_l(C64::new(3.0, 0.0)) - want).abs() < 1e-15);
        assert!((oracle_free_l(C64::new(-3.0, 0.0)) - want).abs() < 1e-15);
        assert_eq!(oracle_single_exp_l(C64::new(0.0, 0.0), C64::new(2.0, 0.0)), 2f64.ln());
        // on the ellipse (Re/2cosh g)^2 + (Im/2sinh g)^2 = 1 the free exponent is g
        let g: f64 = 0.8;
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let e = C64::new(2.0 * g.cosh() * t.cos(), 2.0 * g.sinh() * t.sin());
            assert!((oracle_free_l(e) - g).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_free_field() {
        let grid = GridSpec::new((-4.0, 4.0), (-2.0, 2.0), 81, 41);
        let f = LyapunovField::from_fn(grid, 1.0, oracle_free_l);
        let c = classify(&f, 1.0, 1e-3).unwrap();
        let at = |z: C64| {
            let i = ((z.re + 4.0) / 0.1).round() as usize;
            let j = ((z.im + 2.0) / 0.1).round() as usize;
            c[grid.index(i, j)]
        };
        assert_eq!(at(C64::new(0.0, 0.0)).label, EnergyLabel::EMinus);
        assert_eq!(at(C64::new(3.5, 0.0)).label, EnergyLabel::EPlus);
        assert!((at(C64::new(3.5, 0.0)).margin - (oracle_free_l(C64::new(3.5, 0.0)) - 1.0)).abs() < 1e-15);
        let on = C64::new(2.0 * 1f64.cosh(), 0.0);
        assert_eq!(classify_value(oracle_free_l(on), 1.0, 1e-3).label, EnergyLabel::EZero);
    }

    #[test]
    fn classify_rejects_noisy_fields() {
        let grid = GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 3, 3);
        let mut f = LyapunovField::from_fn(grid, 0.0, oracle_free_l);
        f.stderr[4] = 0.01;
        assert!(matches!(classify(&f, 0.5, 0.015), Err(Error::ToleranceTooSmall { .. })));
        f.stderr[4] = 0.0;
        f.converged[2] = false;
        assert!(matches!(classify(&f, 0.5, 0.015), Err(Error::UnresolvedField { count: 1 })));
    }
}
