//! Green's functions of the infinite operator on finite index windows.
//!
//! Below the coupling (`L(E) < g`) the Green's function is lower triangular
//! and built column by column from the forward recurrence. Above it
//! (`L(E) > g`, `E` off the real spectrum) it is the similarity transform
//! `e^{(n-m) g} G_0(m, n)` of the `g = 0` resolvent, assembled from the
//! stable and unstable solutions.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{lyapunov, sections, uh_test, LyapunovConfig, UhConfig, UhVerdict};
use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::potential::{potential_sequence, Potential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreenRegime {
    #[serde(rename = "E_minus_forward")]
    EMinusForward,
    #[serde(rename = "E_plus_hyperbolic")]
    EPlusHyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub lyapunov: LyapunovConfig,
    pub uh: UhConfig,
    /// Required separation of `L(E)` from `g`, in standard errors.
    pub margin_sigmas: f64,
    /// Burn-in for the stable and unstable sections.
    pub section_horizon: usize,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            lyapunov: LyapunovConfig::with_steps(100_000),
            uh: UhConfig::default(),
            margin_sigmas: 3.0,
            section_horizon: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenWindow {
    pub e: C64,
    pub g: f64,
    /// Sites run over `-w ..= w`.
    pub w: i64,
    pub regime: GreenRegime,
    /// Row-major, `entries[(m + w) * (2w + 1) + (n + w)] = G(m, n)`.
    pub entries: Vec<C64>,
    /// Potential on `-w ..= w`.
    pub potential: Vec<C64>,
    /// Some entry fell below 1e-300 and was stored as zero.
    pub underflow: bool,
    pub lyapunov: f64,
    pub lyapunov_stderr: f64,
}

impl GreenWindow {
    pub fn size(&self) -> usize {
        (2 * self.w + 1) as usize
    }

    pub fn get(&self, m: i64, n: i64) -> C64 {
        let s = self.size();
        self.entries[(m + self.w) as usize * s + (n + self.w) as usize]
    }

    /// Largest deviation of `(H - E) G` and `G (H - E)` from the identity
    /// over rows (resp. columns) strictly inside the window.
    pub fn residuals(&self) -> (f64, f64) {
        let (up, down) = (C64::new(-self.g.exp(), 0.0), C64::new(-(-self.g).exp(), 0.0));
        let w = self.w;
        let v = |k: i64| self.potential[(k + w) as usize] - self.e;
        let delta = |m: i64, n: i64| if m == n { 1.0 } else { 0.0 };
        let mut right = 0.0f64;
        let mut left = 0.0f64;
        for m in -w + 1..w {
            for n in -w..=w {
                let r = up * self.get(m + 1, n) + down * self.get(m - 1, n) + v(m) * self.get(m, n);
                right = right.max((r - delta(m, n)).norm());
                let l = up * self.get(n, m - 1) + down * self.get(n, m + 1) + v(m) * self.get(n, m);
                left = left.max((l - delta(n, m)).norm());
            }
        }
        (right, left)
    }

    /// `G psi` for `psi` indexed by the window sites.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let s = self.size();
        (0..s).map(|i| (0..s).map(|j| self.entries[i * s + j] * psi[j]).sum()).collect()
    }

    /// Rows `m,n,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "m,n,re,im")?;
        for m in -self.w..=self.w {
            for n in -self.w..=self.w {
                let z = self.get(m, n);
                writeln!(out, "{m},{n},{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
            }
        }
        Ok(())
    }
}

const UNDERFLOW_LOG: f64 = -690.7755278982137; // ln 1e-300

fn window_potential(base: &BaseSystem, p: &Potential, x0: &Phase, from: i64, len: usize) -> Result<Vec<C64>> {
    p.check_compatible(base)?;
    potential_sequence(base, p, x0, from, len)
}

/// The forward Green's function for `E` with `L(E) < g`.
pub fn green_forward(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    e: C64,
    g: f64,
    w: usize,
    cfg: &GreenConfig,
) -> Result<GreenWindow> {
    let est = lyapunov(base, p, e, 0.0, x0, &cfg.lyapunov)?;
    let margin = cfg.margin_sigmas * est.stderr;
    if !(est.value < g - margin) {
        return Err(Error::Regime(format!(
            "forward construction needs L(E) < g - {margin:.3e}, got L = {} and g = {g}",
            est.value
        )));
    }
    let wi = w as i64;
    let s = 2 * w + 1;
    let potential = window_potential(base, p, x0, -wi, s)?;
    let damp = (-g).exp();
    let b = (-2.0 * g).exp();
    let columns: Vec<(Vec<C64>, bool)> = (0..s)
        .into_par_iter()
        .map(|col| {
            let mut out = vec![C64::new(0.0, 0.0); s];
            let mut under = false;
            // phi_n = 0, phi_{n+1} = e^{-g}; G(m, n) = -phi_m for m > n
            let (mut prev, mut cur) = (C64::new(0.0, 0.0), C64::new(damp, 0.0));
            let mut log_scale = 0.0;
            for row in col + 1..s {
                let z = -cur;
                let lz = z.norm().ln() + log_scale;
                out[row] = if lz < UNDERFLOW_LOG {
                    under |= z != C64::new(0.0, 0.0);
                    C64::new(0.0, 0.0)
                } else {
                    z * log_scale.exp()
                };
                let next = (potential[row] - e) * cur * damp - prev * b;
                prev = cur;
                cur = next;
                let m = cur.norm().max(prev.norm());
                if m > 1e100 || (m < 1e-100 && m > 0.0) {
                    log_scale += m.ln();
                    cur /= m;
                    prev /= m;
                }
            }
            (out, under)
        })
        .collect();
    let mut entries = vec![C64::new(0.0, 0.0); s * s];
    let mut underflow = false;
    for (col, (c, u)) in columns.into_iter().enumerate() {
        underflow |= u;
        for (row, z) in c.into_iter().enumerate() {
            entries[row * s + col] = z;
        }
    }
    Ok(GreenWindow {
        e,
        g,
        w: wi,
        regime: GreenRegime::EMinusForward,
        entries,
        potential,
        underflow,
        lyapunov: est.value,
        lyapunov_stderr: est.stderr,
    })
}

/// The Green's function for `E` with `L(E) > g` at which the `g = 0` cocycle
/// is uniformly hyperbolic.
pub fn green_hyperbolic(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    e: C64,
    g: f64,
    w: usize,
    cfg: &GreenConfig,
) -> Result<GreenWindow> {
    let est = lyapunov(base, p, e, 0.0, x0, &cfg.lyapunov)?;
    let margin = cfg.margin_sigmas * est.stderr;
    if !(est.value > g + margin) {
        return Err(Error::Regime(format!(
            "hyperbolic construction needs L(E) > g + {margin:.3e}, got L = {} and g = {g}",
            est.value
        )));
    }
    let cert = uh_test(base, p, e, x0, &cfg.uh)?;
    if cert.verdict != UhVerdict::UniformlyHyperbolic {
        return Err(Error::Regime(format!(
            "cocycle is not certified uniformly hyperbolic at E = {e} ({:?})",
            cert.verdict
        )));
    }
    if cert.min_angle < cfg.uh.angle_floor {
        return Err(Error::Regime(format!("invariant directions too close: min angle {:.3e}", cert.min_angle)));
    }
    let wi = w as i64;
    let s = 2 * w + 1;
    let burn = cfg.section_horizon;
    // vectors at sites -w-1 ..= w+1
    let from = -wi - 1 - burn as i64;
    let seq = window_potential(base, p, x0, from, s + 2 + 2 * burn)?;
    let sec = sections(&seq, e, burn);
    if sec.spread > cfg.uh.dir_tol {
        return Err(Error::Regime(format!("sections did not converge: spread {:.3e}", sec.spread)));
    }
    // index i of the sections is site -w-1+i; vector (u_k, u_{k-1})
    let center = w + 1;
    let logs = |dirs: &[[C64; 2]]| -> Vec<C64> {
        // log rho with S_k w_k = c_k w_{k+1}, normalized to rho = 1 at the center
        let mut l = vec![C64::new(0.0, 0.0); dirs.len()];
        for i in center..dirs.len() - 1 {
            let a = seq[burn + i] - e;
            let sw = [a * dirs[i][0] - dirs[i][1], dirs[i][0]];
            let c = dirs[i + 1][0].conj() * sw[0] + dirs[i + 1][1].conj() * sw[1];
            l[i + 1] = l[i] + c.ln();
        }
        for i in (1..=center).rev() {
            let a = seq[burn + i - 1] - e;
            let sw = [a * dirs[i - 1][0] - dirs[i - 1][1], dirs[i - 1][0]];
            let c = dirs[i][0].conj() * sw[0] + dirs[i][1].conj() * sw[1];
            l[i - 1] = l[i] - c.ln();
        }
        l
    };
    let (lu, ls) = (logs(&sec.unstable), logs(&sec.stable));
    // psi at site k is the first component of rho_k w_k
    let log_psi = |l: &[C64], dirs: &[[C64; 2]], i: usize| l[i] + dirs[i][0].ln();
    // Wronskian u^-_{k+1} u^+_k - u^+_{k+1} u^-_k = det(U_{k+1}, S_{k+1})
    let (du, ds) = (sec.unstable[center + 1], sec.stable[center + 1]);
    let det = du[0] * ds[1] - du[1] * ds[0];
    let log_wr = lu[center + 1] + ls[center + 1] + det.ln();
    let mut entries = vec![C64::new(0.0, 0.0); s * s];
    let mut underflow = false;
    for row in 0..s {
        for col in 0..s {
            let (lo, hi) = (row.min(col) + 1, row.max(col) + 1);
            let lz = C64::new((col as f64 - row as f64) * g, 0.0)
                + log_psi(&lu, &sec.unstable, lo)
                + log_psi(&ls, &sec.stable, hi)
                - log_wr;
            entries[row * s + col] = if lz.re < UNDERFLOW_LOG {
                underflow = true;
                C64::new(0.0, 0.0)
            } else {
                lz.exp()
            };
        }
    }
    Ok(GreenWindow {
        e,
        g,
        w: wi,
        regime: GreenRegime::EPlusHyperbolic,
        entries,
        potential: seq[burn + 1..burn + 1 + s].to_vec(),
        underflow,
        lyapunov: est.value,
        lyapunov_stderr: est.stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay rate of `|G(m, n)|` in `m - n > 0`.
    pub rate_right: Option<f64>,
    /// Decay rate of `|G(m, n)|` in `n - m > 0`.
    pub rate_left: Option<f64>,
    /// `exp` of the larger fitted intercept.
    pub prefactor: f64,
    pub distances_right: usize,
    pub distances_left: usize,
}

const FIT_FLOOR: f64 = 1e-14;
const MIN_DISTANCES: usize = 10;

/// Least-squares slopes of `log |G(m, n)|` against `|m - n|` on each side
/// of the diagonal, over entries above 1e-14.
pub fn decay_fit(gw: &GreenWindow) -> Result<DecayFit> {
    let side = |sign: i64| -> (Option<(f64, f64)>, usize) {
        let mut pts = Vec::new();
        for m in -gw.w..=gw.w {
            for n in -gw.w..=gw.w {
                let d = (m - n) * sign;
                let a = gw.get(m, n).norm();
                if d > 0 && a > FIT_FLOOR {
                    pts.push((d as f64, a.ln()));
                }
            }
        }
        let mut ds: Vec<i64> = pts.iter().map(|p| p.0 as i64).collect();
        ds.sort_unstable();
        ds.dedup();
        if ds.len() < MIN_DISTANCES {
            return (None, ds.len());
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (Some((-slope, my - slope * mx)), ds.len())
    };
    let (r, dr) = side(1);
    let (l, dl) = side(-1);
    if r.is_none() && l.is_none() {
        return Err(Error::InsufficientRange { distances: dr.max(dl) });
    }
    let prefactor = r.iter().chain(l.iter()).map(|f| f.1).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(DecayFit {
        rate_right: r.map(|f| f.0),
        rate_left: l.map(|f| f.0),
        prefactor,
        distances_right: dr,
        distances_left: dl,
    })
}
