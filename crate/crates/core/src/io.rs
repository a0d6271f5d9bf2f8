//! Plain-text and binary serialization of grids, point clouds and reports.
//!
//! Binary grid layout (little endian):
//!
//! ```text
//! offset  size  content
//! 0       8     magic b"HNGRID\0\x01"
//! 8       4     nx (u32)
//! 12      4     ny (u32)
//! 16      4     number of layers (u32)
//! 20      4     reserved, 0
//! 24      32    re_min, re_max, im_min, im_max (f64)
//! 56      16*L  layer names, NUL padded
//! ...     8*nx*ny*L  layer data, layer after layer, row-major (row = im index)
//! ```

use num_complex::Complex64 as C64;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const GRID_MAGIC: &[u8; 8] = b"HNGRID\0\x01";

/// Round-trip decimal formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s.trim() {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| Error::Io(format!("bad number {t:?}"))),
    }
}

/// CSV with header `re,im` and one complex number per line.
pub fn write_points_csv<W: Write>(mut w: W, points: &[C64]) -> Result<()> {
    writeln!(w, "re,im")?;
    for z in points {
        writeln!(w, "{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

pub fn read_points_csv<R: Read>(mut r: R) -> Result<Vec<C64>> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    let mut out = Vec::new();
    for line in s.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let mut it = line.split(',');
        let re = parse_f64(it.next().unwrap_or(""))?;
        let im = parse_f64(it.next().unwrap_or(""))?;
        out.push(C64::new(re, im));
    }
    Ok(out)
}

pub fn write_grid<W: Write>(mut w: W, grid: &GridSpec, layers: &[(&str, &[f64])]) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    w.write_all(&(grid.nx as u32).to_le_bytes())?;
    w.write_all(&(grid.ny as u32).to_le_bytes())?;
    w.write_all(&(layers.len() as u32).to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for b in [grid.re_min, grid.re_max, grid.im_min, grid.im_max] {
        w.write_all(&b.to_le_bytes())?;
    }
    for (name, data) in layers {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("layer {name} has wrong length")));
        }
        let mut buf = [0u8; 16];
        let bytes = name.as_bytes();
        let k = bytes.len().min(16);
        buf[..k].copy_from_slice(&bytes[..k]);
        w.write_all(&buf)?;
    }
    for (_, data) in layers {
        for v in data.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub type GridLayers = Vec<(String, Vec<f64>)>;

pub fn read_grid<R: Read>(mut r: R) -> Result<(GridSpec, GridLayers)> {
    let mut head = [0u8; 56];
    r.read_exact(&mut head)?;
    if &head[..8] != GRID_MAGIC {
        return Err(Error::Io("not a grid file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let (nx, ny, nl) = (u32_at(8), u32_at(12), u32_at(16));
    let grid = GridSpec::new((f64_at(24), f64_at(32)), (f64_at(40), f64_at(48)), nx, ny);
    let mut names = Vec::with_capacity(nl);
    for _ in 0..nl {
        let mut buf = [0u8; 16];
        r.read_exact(&mut buf)?;
        let end = buf.iter().position(|&b| b == 0).unwrap_or(16);
        names.push(String::from_utf8_lossy(&buf[..end]).into_owned());
    }
    let mut layers = Vec::with_capacity(nl);
    for name in names {
        let mut data = vec![0f64; nx * ny];
        let mut b = [0u8; 8];
        for v in data.iter_mut() {
            r.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b);
        }
        layers.push((name, data));
    }
    Ok((grid, layers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn decimal_formatting_round_trips(x in proptest::num::f64::ANY) {
            let back = parse_f64(&fmt_f64(x)).unwrap();
            prop_assert!(back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()) || (x == 0.0 && back == 0.0));
        }
    }

    #[test]
    fn binary_grid_round_trip() {
        let grid = GridSpec::new((-1.0, 2.0), (-0.5, 0.5), 3, 2);
        let a: Vec<f64> = (0..6).map(|k| k as f64 * 0.1).collect();
        let b: Vec<f64> = (0..6).map(|k| -(k as f64)).collect();
        let mut buf = Vec::new();
        write_grid(&mut buf, &grid, &[("L", &a), ("stderr", &b)]).unwrap();
        assert_eq!(buf.len(), 56 + 32 + 8 * 12);
        let (g2, layers) = read_grid(&buf[..]).unwrap();
        assert_eq!(g2, grid);
        assert_eq!(layers[0], ("L".to_string(), a));
        assert_eq!(layers[1].0, "stderr");
    }

    #[test]
    fn points_csv_round_trip() {
        let pts = vec![C64::new(0.1, -2.0), C64::new(1.0 / 3.0, 1e-300)];
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &pts).unwrap();
        assert_eq!(read_points_csv(&buf[..]).unwrap(), pts);
    }
}
