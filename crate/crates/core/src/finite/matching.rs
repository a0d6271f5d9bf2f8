//! Pairing of two complex multisets.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Greedy,
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// `pairs[i] = (index into a, index into b)`.
    pub pairs: Vec<(usize, usize)>,
    pub max_distance: f64,
    pub total_distance: f64,
    pub method: MatchMethod,
}

/// Sorts by real part, then imaginary part.
pub fn sort_lex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn lex_order(v: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].re.total_cmp(&v[j].re).then(v[i].im.total_cmp(&v[j].im)));
    idx
}

/// Above this size the optimal assignment is skipped (cubic cost).
pub const OPTIMAL_MAX: usize = 2048;

/// Greedy nearest-neighbour pairing in lexicographic order; falls back to a
/// minimum-total-distance assignment when the greedy total exceeds `tol`.
pub fn match_eigenvalues(a: &[C64], b: &[C64], tol: f64) -> Matching {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let greedy = greedy(a, b);
    if greedy.total_distance <= tol || a.len() > OPTIMAL_MAX {
        return greedy;
    }
    let n = a.len();
    let cost: Vec<f64> = (0..n * n).map(|k| (a[k / n] - b[k % n]).norm()).collect();
    let assign = hungarian(&cost, n);
    let pairs: Vec<(usize, usize)> = assign.into_iter().enumerate().collect();
    let d: Vec<f64> = pairs.iter().map(|&(i, j)| (a[i] - b[j]).norm()).collect();
    let opt = Matching {
        max_distance: d.iter().cloned().fold(0.0, f64::max),
        total_distance: d.iter().sum(),
        pairs,
        method: MatchMethod::Optimal,
    };
    if opt.total_distance <= greedy.total_distance {
        opt
    } else {
        greedy
    }
}

fn greedy(a: &[C64], b: &[C64]) -> Matching {
    let oa = lex_order(a);
    let ob = lex_order(b);
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::with_capacity(a.len());
    let (mut max_d, mut total) = (0.0f64, 0.0);
    for &i in &oa {
        let mut best = usize::MAX;
        let mut bd = f64::INFINITY;
        for &j in &ob {
            if !used[j] {
                let d = (a[i] - b[j]).norm();
                if d < bd {
                    bd = d;
                    best = j;
                }
            }
        }
        used[best] = true;
        pairs.push((i, best));
        max_d = max_d.max(bd);
        total += bd;
    }
    pairs.sort_unstable();
    Matching { pairs, max_distance: max_d, total_distance: total, method: MatchMethod::Greedy }
}

/// Minimum-cost perfect assignment on an `n x n` row-major cost matrix
/// (shortest augmenting paths with potentials). Returns `row -> column`.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut ans = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            ans[p[j] - 1] = j - 1;
        }
    }
    ans
}
