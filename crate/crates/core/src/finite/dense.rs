//! Dense complex eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form, then single-shift QR with Givens rotations.

use num_complex::Complex64 as C64;

const RADIX: f64 = 2.0;

/// Diagonal similarity by powers of two that evens out row and column norms.
pub(crate) fn balance(a: &mut [C64], n: usize) {
    let sq = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].norm();
                    r += a[i * n + j].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sq;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sq;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[i * n + j] *= inv;
                    a[j * n + i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// In-place reduction to upper Hessenberg form by Householder reflections.
pub(crate) fn hessenberg(a: &mut [C64], n: usize) {
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut s = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut xnorm2 = 0.0;
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
            xnorm2 += v[i].norm_sqr();
        }
        let tail: f64 = v[1..m].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let phase = if v[0] == zero { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vn2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vn2;
        // left: rows k+1.., columns k..
        for sj in s[k..n].iter_mut() {
            *sj = zero;
        }
        for i in 0..m {
            let vi = v[i].conj();
            let row = &a[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k..n {
                s[j] += vi * row[j];
            }
        }
        for i in 0..m {
            let vi = v[i] * beta;
            let row = &mut a[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k..n {
                row[j] -= vi * s[j];
            }
        }
        // right: all rows, columns k+1..
        for r in 0..n {
            let row = &mut a[r * n..(r + 1) * n];
            let mut t = zero;
            for l in 0..m {
                t += row[k + 1 + l] * v[l];
            }
            t *= beta;
            for l in 0..m {
                row[k + 1 + l] -= t * v[l].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            a[i * n + k] = zero;
        }
    }
}

#[inline]
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let r = (an * an + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (1.0, C64::new(0.0, 0.0))
    } else if an == 0.0 {
        (0.0, b.conj() / b.norm())
    } else {
        (an / r, (a / an) * b.conj() / r)
    }
}

/// Eigenvalues of an upper Hessenberg matrix. On failure returns the indices
/// of the unconverged block.
pub(crate) fn hessenberg_qr(h: &mut [C64], n: usize, max_iter: usize) -> Result<Vec<C64>, Vec<usize>> {
    let eps = f64::EPSILON;
    let zero = C64::new(0.0, 0.0);
    let hnorm = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut eig = vec![zero; n];
    let mut rot = vec![(0.0, zero); n];
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n as isize - 1;
    while hi >= 0 {
        let hiu = hi as usize;
        let mut l = hiu;
        while l > 0 {
            let sub = h[l * n + l - 1].norm();
            let mut scale = h[(l - 1) * n + l - 1].norm() + h[l * n + l].norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if sub <= eps * scale {
                h[l * n + l - 1] = zero;
                break;
            }
            l -= 1;
        }
        if l == hiu {
            eig[hiu] = h[hiu * n + hiu];
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > max_iter {
            return Err((0..=hiu).collect());
        }
        let a = h[(hiu - 1) * n + hiu - 1];
        let b = h[(hiu - 1) * n + hiu];
        let c = h[hiu * n + hiu - 1];
        let d = h[hiu * n + hiu];
        let mu = if its % 10 == 0 {
            d + C64::new(0.75, 0.4) * c.norm()
        } else {
            let m = (a + d) * 0.5;
            let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            let (r1, r2) = (m + disc, m - disc);
            if (r1 - d).norm() < (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };
        for k in l..=hiu {
            h[k * n + k] -= mu;
        }
        for k in l..hiu {
            let (cs, sn) = givens(h[k * n + k], h[(k + 1) * n + k]);
            rot[k] = (cs, sn);
            for j in k..=hiu {
                let x = h[k * n + j];
                let y = h[(k + 1) * n + j];
                h[k * n + j] = x * cs + sn * y;
                h[(k + 1) * n + j] = -sn.conj() * x + y * cs;
            }
        }
        for k in l..hiu {
            let (cs, sn) = rot[k];
            for i in l..=(k + 1).min(hiu) {
                let p = h[i * n + k];
                let q = h[i * n + k + 1];
                h[i * n + k] = p * cs + q * sn.conj();
                h[i * n + k + 1] = -p * sn + q * cs;
            }
        }
        for k in l..=hiu {
            h[k * n + k] += mu;
        }
    }
    Ok(eig)
}

/// All eigenvalues of a dense row-major matrix (consumed).
pub(crate) fn dense_eigenvalues(mut a: Vec<C64>, n: usize, max_iter: usize) -> Result<Vec<C64>, Vec<usize>> {
    balance(&mut a, n);
    hessenberg(&mut a, n);
    hessenberg_qr(&mut a, n, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(a: &[C64], n: usize) -> C64 {
        let mut m = a.to_vec();
        let mut d = C64::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| m[x * n + k].norm().partial_cmp(&m[y * n + k].norm()).unwrap()).unwrap();
            if p != k {
                for j in 0..n {
                    m.swap(k * n + j, p * n + j);
                }
                d = -d;
            }
            d *= m[k * n + k];
            for i in k + 1..n {
                let f = m[i * n + k] / m[k * n + k];
                for j in k..n {
                    let t = m[k * n + j];
                    m[i * n + j] -= f * t;
                }
            }
        }
        d
    }

    fn sample(n: usize) -> Vec<C64> {
        (0..n * n).map(|k| C64::new((1.3 * k as f64).sin() * 4.0, (0.7 * (k * k) as f64).cos())).collect()
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let n = 7;
        let a = sample(n);
        let mut h = a.clone();
        hessenberg(&mut h, n);
        let tr_a: C64 = (0..n).map(|i| a[i * n + i]).sum();
        let tr_h: C64 = (0..n).map(|i| h[i * n + i]).sum();
        assert!((tr_a - tr_h).norm() < 1e-10);
        for i in 2..n {
            for j in 0..i - 1 {
                assert_eq!(h[i * n + j], C64::new(0.0, 0.0));
            }
        }
        assert!((det(&a, n) - det(&h, n)).norm() < 1e-8 * det(&a, n).norm());
    }

    #[test]
    fn eigenvalues_annihilate_the_characteristic_polynomial() {
        let n = 9;
        let a = sample(n);
        let ev = dense_eigenvalues(a.clone(), n, 30 * n).unwrap();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for l in ev {
            let mut s = a.clone();
            for i in 0..n {
                s[i * n + i] -= l;
            }
            assert!(det(&s, n).norm() < 1e-8 * scale.powi(n as i32));
        }
    }

    #[test]
    fn triangular_input_returns_its_diagonal() {
        let n = 4;
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                a[i * n + j] = C64::new((i + j) as f64, 1.0);
            }
        }
        let mut ev = dense_eigenvalues(a, n, 120).unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (i, l) in ev.iter().enumerate() {
            assert!((l - C64::new(2.0 * i as f64, 1.0)).norm() < 1e-12);
        }
    }
}
