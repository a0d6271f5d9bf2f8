//! `Sigma(g) = E_0 union (Sigma(0) intersect E_+)` on a grid.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::check_field;
use super::contour::{marching_squares, Contour};
use crate::cocycle::LyapunovField;
use crate::error::Result;
use crate::grid::GridSpec;

/// A grid cell where `L` stays within `tol0` of `g` with a small gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilledCell {
    pub i: usize,
    pub j: usize,
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl FilledCell {
    pub fn area(&self) -> f64 {
        (self.re1 - self.re0) * (self.im1 - self.im0)
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub g: f64,
    pub tol0: f64,
    pub grad_floor: f64,
    pub grid: GridSpec,
    /// Disjoint sorted closed intervals of `Sigma(0)` where `L > g + tol0`.
    pub real_part: Vec<[f64; 2]>,
    /// Polylines of `{L = g}`.
    pub complex_part: Vec<Contour>,
    pub filled_cells: Vec<FilledCell>,
}

impl SpectrumSet {
    pub fn filled_area(&self) -> f64 {
        self.filled_cells.iter().map(|c| c.area()).sum()
    }

    /// Points of the set at spacing at most `step`: interval samples,
    /// subdivided polylines and filled-cell centers.
    pub fn sample_points(&self, step: f64) -> Vec<C64> {
        let mut out = Vec::new();
        for &[a, b] in &self.real_part {
            let k = ((b - a) / step).ceil().max(1.0) as usize;
            for t in 0..=k {
                out.push(C64::new(a + (b - a) * t as f64 / k as f64, 0.0));
            }
        }
        for c in &self.complex_part {
            let mut pts = c.points.clone();
            if c.closed {
                pts.push(pts[0]);
            }
            out.push(pts[0]);
            for w in pts.windows(2) {
                let k = ((w[1] - w[0]).norm() / step).ceil().max(1.0) as usize;
                for t in 1..=k {
                    out.push(w[0] + (w[1] - w[0]) * (t as f64 / k as f64));
                }
            }
        }
        out.extend(self.filled_cells.iter().map(|c| c.center()));
        out
    }

    /// Largest `|Im E|` over the level-set polylines.
    pub fn max_abs_imag(&self) -> f64 {
        self.complex_part.iter().flat_map(|c| c.points.iter()).map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Assembles the spectrum at coupling `g` from a field of `L = L_0`.
pub fn assemble_spectrum(field: &LyapunovField, g: f64, sigma0: &[[f64; 2]], tol0: f64) -> Result<SpectrumSet> {
    check_field(field, tol0)?;
    let grid = field.grid;
    let real_part = real_part(field, g, sigma0, tol0);
    let complex_part = marching_squares(&grid, &field.values, g);
    let h = grid.step();
    let grad_floor = tol0 / h;
    let grad = node_gradients(field);
    let mut filled_cells = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let flat = corners.iter().all(|&(a, b)| {
                let k = grid.index(a, b);
                (field.values[k] - g).abs() < tol0 && grad[k] < grad_floor
            });
            if flat {
                let (p, q) = (grid.node(i, j), grid.node(i + 1, j + 1));
                filled_cells.push(FilledCell { i, j, re0: p.re, re1: q.re, im0: p.im, im1: q.im });
            }
        }
    }
    Ok(SpectrumSet { g, tol0, grad_floor, grid, real_part, complex_part, filled_cells })
}

/// Largest one-sided difference quotient over the 3x3 neighbourhood.
fn node_gradients(field: &LyapunovField) -> Vec<f64> {
    let grid = field.grid;
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let v = field.at(i, j);
            let mut m = 0.0f64;
            for (di, dj) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= grid.nx as i64 || b >= grid.ny as i64 {
                    continue;
                }
                let d = ((di as f64 * dx).powi(2) + (dj as f64 * dy).powi(2)).sqrt();
                m = m.max((field.at(a as usize, b as usize) - v).abs() / d);
            }
            out[grid.index(i, j)] = m;
        }
    }
    out
}

fn real_part(field: &LyapunovField, g: f64, sigma0: &[[f64; 2]], tol0: f64) -> Vec<[f64; 2]> {
    let grid = field.grid;
    if grid.im_min > 0.0 || grid.im_max < 0.0 {
        return Vec::new();
    }
    let step = 0.25 * grid.dx();
    let mut out: Vec<[f64; 2]> = Vec::new();
    for &[a, b] in sigma0 {
        let k = ((b - a) / step).ceil().max(1.0) as usize;
        let mut run: Option<[f64; 2]> = None;
        for t in 0..=k {
            let x = a + (b - a) * t as f64 / k as f64;
            let l = field.interpolate(C64::new(x, 0.0));
            let keep = l.is_some_and(|l| l > g + tol0);
            match (&mut run, keep) {
                (Some(r), true) => r[1] = x,
                (None, true) => run = Some([x, x]),
                (Some(r), false) => {
                    out.push(*r);
                    run = None;
                }
                (None, false) => {}
            }
        }
        if let Some(r) = run {
            out.push(r);
        }
    }
    out.sort_by(|p, q| p[0].total_cmp(&q[0]));
    let mut merged: Vec<[f64; 2]> = Vec::new();
    for r in out {
        match merged.last_mut() {
            Some(m) if r[0] <= m[1] => m[1] = m[1].max(r[1]),
            _ => merged.push(r),
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{count_contours, oracle_free_l, oracle_single_exp_l, ContourKind};

    #[test]
    fn free_field_gives_the_ellipse() {
        let grid = GridSpec::new((-4.0, 4.0), (-3.0, 3.0), 161, 121);
        let field = LyapunovField::from_fn(grid, 1.0, oracle_free_l);
        let s = assemble_spectrum(&field, 1.0, &[[-2.0, 2.0]], 1e-3).unwrap();
        assert!(s.real_part.is_empty());
        assert!(s.filled_cells.is_empty());
        assert_eq!(s.complex_part.len(), 1);
        let (a, b) = (2.0 * 1f64.cosh(), 2.0 * 1f64.sinh());
        for z in &s.complex_part[0].points {
            // distance to the ellipse is below the ellipse residual / gradient
            let r = ((z.re / a).powi(2) + (z.im / b).powi(2)).sqrt();
            assert!((r - 1.0).abs() * b < grid.step());
        }
        let c = count_contours(&s);
        assert_eq!(c.count, 1);
        assert_eq!(c.kinds, vec![ContourKind::Closed]);
    }

    #[test]
    fn plateau_fills_the_ellipse_only_at_the_critical_coupling() {
        let grid = GridSpec::new((-3.0, 3.0), (-2.0, 2.0), 121, 81);
        let lam = C64::new(2.0, 0.0);
        let field = LyapunovField::from_fn(grid, 0.0, |e| oracle_single_exp_l(e, lam));
        let g = 2f64.ln();
        let want = std::f64::consts::PI * 2.5 * 1.5;
        let s = assemble_spectrum(&field, g, &[], 1e-3).unwrap();
        // cells touching the rim are excluded, so the area sits between the
        // ellipse shrunk by a few grid steps and the full ellipse
        let h = grid.step();
        let inner = std::f64::consts::PI * (2.5 - 3.0 * h) * (1.5 - 3.0 * h);
        assert!(s.filled_area() > inner && s.filled_area() < want, "{}", s.filled_area());
        assert!(s.filled_cells.iter().all(|c| {
            let z = c.center();
            (z.re / 2.5).powi(2) + (z.im / 1.5).powi(2) < 1.0
        }));
        for dg in [-0.2, 0.2] {
            let s = assemble_spectrum(&field, g + dg, &[], 1e-3).unwrap();
            assert!(s.filled_area() < 0.01 * want);
        }
    }

    #[test]
    fn real_part_keeps_only_e_plus() {
        let grid = GridSpec::new((-4.0, 4.0), (-1.0, 1.0), 81, 21);
        // L = |x| / 2 on the real axis
        let field = LyapunovField::from_fn(grid, 0.0, |e| 0.5 * e.re.abs());
        let s = assemble_spectrum(&field, 0.5, &[[-3.0, 3.0]], 1e-3).unwrap();
        assert_eq!(s.real_part.len(), 2);
        assert!((s.real_part[0][0] + 3.0).abs() < 1e-12 && (s.real_part[0][1] + 1.0).abs() < 0.03);
        assert!((s.real_part[1][0] - 1.0).abs() < 0.03 && (s.real_part[1][1] - 3.0).abs() < 1e-12);
    }
}
