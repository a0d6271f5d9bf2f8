//! Banded LU of `H - E` after the zigzag reordering `0, n-1, 1, n-2, ...`,
//! which turns the periodic corners into a bandwidth-2 matrix.

use num_complex::Complex64 as C64;

use super::operator::FiniteOperator;

const KL: usize = 2;
const KU: usize = 2;
const W: usize = 2 * KL + KU + 1;

/// Position of site `k` in the zigzag order.
#[cfg(test)]
pub(crate) fn zigzag_pos(k: usize, n: usize) -> usize {
    if 2 * k < n {
        2 * k
    } else {
        2 * (n - 1 - k) + 1
    }
}

#[inline]
fn zigzag_site(pos: usize, n: usize) -> usize {
    if pos % 2 == 0 {
        pos / 2
    } else {
        n - 1 - pos / 2
    }
}

pub(crate) struct BandLu {
    n: usize,
    rows: Vec<C64>,
    mult: Vec<[C64; KL]>,
    piv: Vec<usize>,
    pub zero_pivots: usize,
    pub swaps: usize,
}

impl BandLu {
    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.rows[i * W + (j + KL - i)]
    }

    /// Factorizes `H - e` in zigzag order. Zero pivots are replaced by
    /// `pivot_floor` when it is positive and counted.
    pub fn factor(op: &FiniteOperator, e: C64, pivot_floor: f64) -> BandLu {
        let n = op.n();
        let mut lu = BandLu {
            n,
            rows: vec![C64::new(0.0, 0.0); n * W],
            mult: vec![[C64::new(0.0, 0.0); KL]; n],
            piv: vec![0; n],
            zero_pivots: 0,
            swaps: 0,
        };
        for i in 0..n {
            let si = zigzag_site(i, n);
            let lo = i.saturating_sub(KL);
            let hi = (i + KU).min(n - 1);
            for j in lo..=hi {
                let sj = zigzag_site(j, n);
                let mut v = op.entry(si, sj);
                if si == sj {
                    v -= e;
                }
                *lu.at(i, j) = v;
            }
        }
        for k in 0..n {
            let last = (k + KL).min(n - 1);
            let mut r = k;
            let mut best = lu.rows[k * W + KL].norm();
            for i in k + 1..=last {
                let v = lu.rows[i * W + (k + KL - i)].norm();
                if v > best {
                    best = v;
                    r = i;
                }
            }
            lu.piv[k] = r;
            let cmax = (k + KU + KL).min(n - 1);
            if r != k {
                lu.swaps += 1;
                for c in k..=cmax {
                    let a = *lu.at(k, c);
                    let b = *lu.at(r, c);
                    *lu.at(k, c) = b;
                    *lu.at(r, c) = a;
                }
            }
            if best == 0.0 {
                lu.zero_pivots += 1;
                if pivot_floor > 0.0 {
                    *lu.at(k, k) = C64::new(pivot_floor, 0.0);
                } else {
                    continue;
                }
            }
            let p = *lu.at(k, k);
            for i in k + 1..=last {
                let m = *lu.at(i, k) / p;
                lu.mult[k][i - k - 1] = m;
                *lu.at(i, k) = C64::new(0.0, 0.0);
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in k + 1..=cmax {
                    let u = *lu.at(k, c);
                    *lu.at(i, c) -= m * u;
                }
            }
        }
        lu
    }

    /// `log |det|` and `arg det` in `(-pi, pi]`; `-inf` on an exact zero pivot.
    pub fn log_det(&self) -> (f64, f64) {
        let mut log_abs = 0.0;
        let mut arg = std::f64::consts::PI * (self.swaps % 2) as f64;
        for k in 0..self.n {
            let p = self.rows[k * W + KL];
            if p == C64::new(0.0, 0.0) {
                return (f64::NEG_INFINITY, 0.0);
            }
            log_abs += p.norm().ln();
            arg += p.arg();
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut a = arg.rem_euclid(two_pi);
        if a > std::f64::consts::PI {
            a -= two_pi;
        }
        (log_abs, a)
    }

    /// Solves `(H - e) x = b` with `b` in site order.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y: Vec<C64> = (0..n).map(|i| b[zigzag_site(i, n)]).collect();
        for k in 0..n {
            y.swap(k, self.piv[k]);
            let yk = y[k];
            for (t, m) in self.mult[k].iter().enumerate() {
                if k + 1 + t < n {
                    y[k + 1 + t] -= m * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let cmax = (k + KU + KL).min(n - 1);
            let mut s = y[k];
            for c in k + 1..=cmax {
                s -= self.rows[k * W + (c + KL - k)] * y[c];
            }
            y[k] = s / self.rows[k * W + KL];
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, v) in y.into_iter().enumerate() {
            x[zigzag_site(i, n)] = v;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::operator::Boundary;

    #[test]
    fn zigzag_is_a_bijection_with_small_bandwidth() {
        for n in 3..12 {
            let mut seen = vec![false; n];
            for k in 0..n {
                let p = zigzag_pos(k, n);
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(zigzag_site(p, n), k);
                let q = zigzag_pos((k + 1) % n, n);
                assert!(p.abs_diff(q) <= 2);
            }
        }
    }

    #[test]
    fn solve_inverts_the_operator() {
        let d: Vec<C64> = (0..9).map(|k| C64::new((k as f64).sin(), 0.2 * k as f64)).collect();
        for b in [Boundary::Periodic, Boundary::Dirichlet] {
            let op = FiniteOperator::new(d.clone(), 0.6, b).unwrap();
            let e = C64::new(0.3, -0.4);
            let lu = BandLu::factor(&op, e, 0.0);
            let rhs: Vec<C64> = (0..9).map(|k| C64::new(1.0, -(k as f64))).collect();
            let x = lu.solve(&rhs);
            let hx = op.matvec(&x);
            for k in 0..9 {
                assert!((hx[k] - e * x[k] - rhs[k]).norm() < 1e-12);
            }
        }
    }
}
