//! Rectangular grids over the complex energy plane.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node `(i, j)` sits at `re_min + i * dx + i (im_min + j * dy)`; values are
/// stored row-major with `j` (imaginary part) as the row index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Self {
        GridSpec { re_min: re.0, re_max: re.1, im_min: im.0, im_max: im.1, nx, ny }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument(format!("grid needs nx, ny >= 2 (got {} x {})", self.nx, self.ny)));
        }
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite());
        if !finite || self.re_max <= self.re_min || self.im_max <= self.im_min {
            return Err(Error::InvalidArgument("grid bounds must be finite and increasing".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / (self.ny - 1) as f64
    }

    /// The larger of the two grid spacings.
    pub fn step(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re_min + i as f64 * self.dx(), self.im_min + j as f64 * self.dy())
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Row index whose imaginary part is zero, if the real axis is a grid row.
    pub fn real_axis_row(&self) -> Option<usize> {
        let t = -self.im_min / self.dy();
        let j = t.round();
        if j >= 0.0 && (j as usize) < self.ny && (t - j).abs() < 1e-9 {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Bilinear interpolation of row-major `values` at `z`; `None` outside.
    pub fn interpolate(&self, values: &[f64], z: C64) -> Option<f64> {
        if !self.contains(z) {
            return None;
        }
        let tx = ((z.re - self.re_min) / self.dx()).clamp(0.0, (self.nx - 1) as f64);
        let ty = ((z.im - self.im_min) / self.dy()).clamp(0.0, (self.ny - 1) as f64);
        let i = (tx.floor() as usize).min(self.nx - 2);
        let j = (ty.floor() as usize).min(self.ny - 2);
        let (fx, fy) = (tx - i as f64, ty - j as f64);
        let v00 = values[self.index(i, j)];
        let v10 = values[self.index(i + 1, j)];
        let v01 = values[self.index(i, j + 1)];
        let v11 = values[self.index(i + 1, j + 1)];
        Some(v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy)
    }
}
