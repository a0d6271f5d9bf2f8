//! Roots of `det(H - E)` by Aberth iteration. The determinant and its
//! derivative come from the transfer-matrix recurrence:
//! periodic `det(H - E) = tr A_n(E) - 2 cosh(n g)`, Dirichlet
//! `det(H - E) = [A_n(E)]_{11}`, with `A_n` the `g = 0` product.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::operator::{Boundary, FiniteOperator};

const EXP_CLAMP: f64 = 700.0;

/// Newton correction `f(E) / f'(E)`; `None` when `f'` underflows relative
/// to `f` (an infinite step).
pub(crate) fn newton_ratio(op: &FiniteOperator, e: C64) -> Option<C64> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match op.boundary {
        Boundary::Periodic => {
            // M = [[m00, m01], [m10, m11]], D = dM/dE
            let (mut m00, mut m01, mut m10, mut m11) = (one, zero, zero, one);
            let (mut d00, mut d01, mut d10, mut d11) = (zero, zero, zero, zero);
            let mut log_scale = 0.0;
            for &v in &op.diagonal {
                let a = v - e;
                // new D = S D + S' M with S' = [[-1, 0], [0, 0]]
                let nd00 = a * d00 - d10 - m00;
                let nd01 = a * d01 - d11 - m01;
                d10 = d00;
                d11 = d01;
                d00 = nd00;
                d01 = nd01;
                let n00 = a * m00 - m10;
                let n01 = a * m01 - m11;
                m10 = m00;
                m11 = m01;
                m00 = n00;
                m01 = n01;
                let big = m00.norm_sqr().max(m01.norm_sqr()).max(m10.norm_sqr()).max(m11.norm_sqr());
                if !(1e-40..=1e40).contains(&big) && big > 0.0 {
                    let s = 1.0 / big.sqrt();
                    m00 *= s;
                    m01 *= s;
                    m10 *= s;
                    m11 *= s;
                    d00 *= s;
                    d01 *= s;
                    d10 *= s;
                    d11 *= s;
                    log_scale -= s.ln();
                }
            }
            // f = e^S tr M - e^{ng} - e^{-ng}, f' = e^S tr D
            let ng = op.n() as f64 * op.g;
            let k = log_scale - ng;
            let (num, den) = if -k > EXP_CLAMP {
                let s = k.exp();
                ((m00 + m11) * s - 1.0 - (-2.0 * ng).exp(), (d00 + d11) * s)
            } else {
                let t = (-k).exp();
                (m00 + m11 - t - t * (-2.0 * ng).exp(), d00 + d11)
            };
            finite_ratio(num, den)
        }
        Boundary::Dirichlet => {
            let (mut p, mut q) = (one, zero);
            let (mut dp, mut dq) = (zero, zero);
            for &v in &op.diagonal {
                let a = v - e;
                let ndp = a * dp - dq - p;
                dq = dp;
                dp = ndp;
                let np = a * p - q;
                q = p;
                p = np;
                let big = p.norm_sqr().max(q.norm_sqr());
                if !(1e-40..=1e40).contains(&big) && big > 0.0 {
                    let s = 1.0 / big.sqrt();
                    p *= s;
                    q *= s;
                    dp *= s;
                    dq *= s;
                }
            }
            finite_ratio(p, dp)
        }
    }
}

fn finite_ratio(num: C64, den: C64) -> Option<C64> {
    let r = num / den;
    r.is_finite().then_some(r)
}

/// `log |det(H - E)|` from the transfer recurrence (no derivative).
pub(crate) fn log_abs_det(op: &FiniteOperator, e: C64) -> f64 {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let (mut m00, mut m01, mut m10, mut m11) = (one, zero, zero, one);
    let mut log_scale = 0.0;
    for &v in &op.diagonal {
        let a = v - e;
        let n00 = a * m00 - m10;
        let n01 = a * m01 - m11;
        m10 = m00;
        m11 = m01;
        m00 = n00;
        m01 = n01;
        let big = m00.norm_sqr().max(m01.norm_sqr());
        if !(1e-40..=1e40).contains(&big) && big > 0.0 {
            let s = 1.0 / big.sqrt();
            m00 *= s;
            m01 *= s;
            m10 *= s;
            m11 *= s;
            log_scale -= s.ln();
        }
    }
    let f = match op.boundary {
        Boundary::Periodic => {
            let ng = op.n() as f64 * op.g;
            let k = log_scale - ng;
            if -k > EXP_CLAMP {
                return ng + ((m00 + m11) * k.exp() - 1.0 - (-2.0 * ng).exp()).norm().ln();
            }
            let t = (-k).exp();
            m00 + m11 - t - t * (-2.0 * ng).exp()
        }
        Boundary::Dirichlet => m00,
    };
    f.norm().ln() + log_scale
}

/// Starting points distributed like the eigenvalue counting measure.
///
/// The counting measure is `(1/2pi) Laplacian log|det(H - E)|`; its discrete
/// version on a grid over the numerical range says how many roots sit near
/// each node, and that many points are placed in a small disc around it.
fn initial_guesses(op: &FiniteOperator) -> Vec<C64> {
    let n = op.n();
    let g = op.g;
    // numerical range: Re within 2 cosh g of Re v, Im within 2 sinh g of Im v
    let (mut re0, mut re1, mut im0, mut im1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &op.diagonal {
        re0 = re0.min(v.re);
        re1 = re1.max(v.re);
        im0 = im0.min(v.im);
        im1 = im1.max(v.im);
    }
    let (cg, sg) = (2.0 * g.cosh(), 2.0 * g.sinh().abs());
    re0 -= cg;
    re1 += cg;
    im0 -= sg;
    im1 += sg;
    let width = re1 - re0;
    let min_height = 0.05 * width;
    if im1 - im0 < min_height {
        let mid = 0.5 * (im0 + im1);
        im0 = mid - 0.5 * min_height;
        im1 = mid + 0.5 * min_height;
    }
    let nodes_wanted = (4 * n).max(1024) as f64;
    let h = ((im1 - im0) * width / nodes_wanted).sqrt();
    // two cells of padding; the 1/3 offset keeps rows off the real axis
    let nx = ((width / h).ceil() as usize) + 5;
    let ny = (((im1 - im0) / h).ceil() as usize) + 5;
    let x0 = re0 - 2.0 * h;
    let y0 = im0 - 2.0 * h + h / 3.0;
    let node = |i: usize, j: usize| C64::new(x0 + i as f64 * h, y0 + j as f64 * h);
    let u: Vec<f64> = (0..nx * ny).into_par_iter().map(|k| log_abs_det(op, node(k % nx, k / nx))).collect();
    let mut mass = vec![0.0; nx * ny];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = j * nx + i;
            let lap = u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx] - 4.0 * u[k];
            if lap.is_finite() && lap > 0.0 {
                mass[k] = lap / (2.0 * std::f64::consts::PI);
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return circle_guesses(op);
    }
    let q: Vec<f64> = mass.iter().map(|m| m * n as f64 / total).collect();
    let mut counts: Vec<usize> = q.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| (q[b] - q[b].floor()).total_cmp(&(q[a] - q[a].floor())).then(a.cmp(&b)));
    for &k in &order {
        if rest == 0 {
            break;
        }
        counts[k] += 1;
        rest -= 1;
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut z = Vec::with_capacity(n);
    for (k, &c) in counts.iter().enumerate() {
        let center = node(k % nx, k / nx);
        for t in 0..c {
            let rho = 0.5 * h * ((t as f64 + 0.5) / c as f64).sqrt();
            z.push(center + C64::from_polar(rho, golden * t as f64 + 0.3));
        }
    }
    z
}

/// Fallback: a circle enclosing every Gershgorin disc.
fn circle_guesses(op: &FiniteOperator) -> Vec<C64> {
    let n = op.n();
    let c = op.trace() / n as f64;
    let spread = op.diagonal.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let r = spread + op.g.exp() + (-op.g).exp();
    (0..n).map(|k| c + C64::from_polar(r, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64)).collect()
}

/// Simultaneous root iteration. Returns the roots and the indices that did
/// not meet the stopping rule within `max_sweeps`.
pub(crate) fn aberth(op: &FiniteOperator, max_sweeps: usize) -> (Vec<C64>, Vec<usize>) {
    let n = op.n();
    let mut z = initial_guesses(op);
    let mut active = vec![true; n];
    let mut last_step = vec![f64::INFINITY; n];
    for _ in 0..max_sweeps {
        let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        if idx.is_empty() {
            break;
        }
        let ratios: Vec<Option<C64>> = idx.par_iter().map(|&i| newton_ratio(op, z[i])).collect();
        for (&i, nr) in idx.iter().zip(ratios) {
            let zi = z[i];
            let mut s = C64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    s += (zi - zj).inv();
                }
            }
            // an infinite Newton step reduces the correction to -1/s
            let w = match nr {
                Some(nr) if nr.norm() > 1.0 => (nr.inv() - s).inv(),
                Some(nr) => nr / (C64::new(1.0, 0.0) - nr * s),
                None => -s.inv(),
            };
            if !w.is_finite() {
                continue;
            }
            z[i] = zi - w;
            let step = w.norm() / (1.0 + z[i].norm());
            // stop at full precision, or once a small step stops shrinking
            // (rounding-limited, e.g. at a multiple root)
            if step <= 1e-12 || (step < 1e-6 && step >= last_step[i]) {
                active[i] = false;
            }
            last_step[i] = step;
        }
    }
    let failed = (0..n).filter(|&i| active[i] || !z[i].is_finite()).collect();
    (z, failed)
}
