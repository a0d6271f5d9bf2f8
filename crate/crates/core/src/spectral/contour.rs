//! Marching squares and contour counting.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::assemble::SpectrumSet;
use crate::grid::GridSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<C64>,
    /// The polyline returns to its first vertex.
    pub closed: bool,
}

const NONE: usize = usize::MAX;

/// Polylines of `{values = level}` with linear interpolation along cell
/// edges. Saddle cells are resolved by the cell-center average.
pub fn marching_squares(grid: &GridSpec, values: &[f64], level: f64) -> Vec<Contour> {
    let (nx, ny) = (grid.nx, grid.ny);
    let h_count = (nx - 1) * ny;
    let n_edges = h_count + nx * (ny - 1);
    let f = |i: usize, j: usize| values[grid.index(i, j)] - level;
    let h_edge = |i: usize, j: usize| j * (nx - 1) + i;
    let v_edge = |i: usize, j: usize| h_count + j * nx + i;
    let edge_point = |e: usize| -> C64 {
        let (a, b) = if e < h_count {
            let (i, j) = (e % (nx - 1), e / (nx - 1));
            ((i, j), (i + 1, j))
        } else {
            let k = e - h_count;
            let (i, j) = (k % nx, k / nx);
            ((i, j), (i, j + 1))
        };
        let (fa, fb) = (f(a.0, a.1), f(b.0, b.1));
        let t = if fa == fb { 0.5 } else { (fa / (fa - fb)).clamp(0.0, 1.0) };
        grid.node(a.0, a.1) * (1.0 - t) + grid.node(b.0, b.1) * t
    };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            if c.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let above: Vec<bool> = c.iter().map(|&v| v >= 0.0).collect();
            // edges in order bottom, right, top, left; edge k joins corners k and k+1
            let edges = [h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)];
            let crossing: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    let center_above = c.iter().sum::<f64>() / 4.0 >= 0.0;
                    // pair each edge with the neighbour that keeps corner 0's
                    // region connected to the center when they agree
                    if center_above == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut incident = vec![[NONE; 2]; n_edges];
    for (s, &(a, b)) in segments.iter().enumerate() {
        for e in [a, b] {
            let slot = &mut incident[e];
            if slot[0] == NONE {
                slot[0] = s;
            } else {
                slot[1] = s;
            }
        }
    }
    let degree = |e: usize, inc: &Vec<[usize; 2]>| inc[e].iter().filter(|&&s| s != NONE).count();
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            let next_seg = incident[cur].iter().copied().find(|&s| s != NONE && !used[s]);
            let Some(s) = next_seg else { break };
            used[s] = true;
            let (a, b) = segments[s];
            cur = if a == cur { b } else { a };
            if cur == start {
                return (chain, true);
            }
            chain.push(cur);
        }
        (chain, false)
    };
    for e in 0..n_edges {
        if degree(e, &incident) == 1 && incident[e].iter().any(|&s| s != NONE && !used[s]) {
            let (chain, closed) = walk(e, &mut used);
            out.push(Contour { points: chain.into_iter().map(edge_point).collect(), closed });
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let (chain, closed) = walk(segments[s].0, &mut used);
            out.push(Contour { points: chain.into_iter().map(edge_point).collect(), closed });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    Closed,
    RealAnchored,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourCount {
    /// Closed plus real-anchored components meeting the closed upper half-plane.
    pub count: usize,
    pub kinds: Vec<ContourKind>,
    pub unresolved: usize,
}

/// Components of the level-set part of `s` in the upper half-plane.
pub fn count_contours(s: &SpectrumSet) -> ContourCount {
    let step = s.grid.step();
    let mut kinds = Vec::new();
    for c in &s.complex_part {
        if c.points.iter().all(|z| z.im < -0.5 * step) {
            continue;
        }
        let (first, last) = (c.points[0], *c.points.last().unwrap());
        let kind = if c.closed || (c.points.len() > 2 && (first - last).norm() < 2.0 * step) {
            ContourKind::Closed
        } else if first.im.abs() < 2.0 * step && last.im.abs() < 2.0 * step {
            ContourKind::RealAnchored
        } else {
            ContourKind::Unresolved
        };
        kinds.push(kind);
    }
    let unresolved = kinds.iter().filter(|k| **k == ContourKind::Unresolved).count();
    ContourCount { count: kinds.len() - unresolved, kinds, unresolved }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(grid: &GridSpec, f: impl Fn(C64) -> f64) -> Vec<f64> {
        (0..grid.len()).map(|k| f(grid.node(k % grid.nx, k / grid.nx))).collect()
    }

    #[test]
    fn circle_gives_one_closed_loop_on_the_circle() {
        let grid = GridSpec::new((-2.0, 2.0), (-2.0, 2.0), 41, 41);
        let v = field(&grid, |z| z.norm());
        let cs = marching_squares(&grid, &v, 1.0);
        assert_eq!(cs.len(), 1);
        assert!(cs[0].closed);
        assert!(cs[0].points.iter().all(|z| (z.norm() - 1.0).abs() < 0.01));
    }

    #[test]
    fn two_disjoint_loops_and_an_open_line() {
        let grid = GridSpec::new((-3.0, 3.0), (-1.0, 1.0), 61, 21);
        let v = field(&grid, |z| (z - 1.5).norm().min((z + 1.5).norm()));
        let cs = marching_squares(&grid, &v, 0.5);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.closed));
        let line = field(&grid, |z| z.re);
        let cs = marching_squares(&grid, &line, 0.25);
        assert_eq!(cs.len(), 1);
        assert!(!cs[0].closed);
        assert!(cs[0].points.iter().all(|z| (z.re - 0.25).abs() < 1e-12));
    }

    #[test]
    fn empty_when_level_is_not_crossed() {
        let grid = GridSpec::new((-1.0, 1.0), (-1.0, 1.0), 5, 5);
        let v = field(&grid, |z| z.norm());
        assert!(marching_squares(&grid, &v, 5.0).is_empty());
    }
}
