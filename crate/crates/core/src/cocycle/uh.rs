//! Finite-time certificates of uniform hyperbolicity for the Schrodinger cocycle.
//!
//! Unstable directions are pushed forward from `T^{-N} x`, stable directions
//! are pulled back from `T^{N+W} x`, both along the same orbit window of
//! length `W`. A fan of starting directions measures how well each section has
//! converged, and the smallest angle between the two sections over all windows
//! is the splitting margin.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BaseSystem, Phase};
use crate::error::Result;
use crate::potential::{potential_sequence, Potential};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UhConfig {
    pub dir_tol: f64,
    pub angle_floor: f64,
    pub growth_floor: f64,
    pub horizon: usize,
    pub max_horizon: usize,
    pub n_phases: usize,
    pub window: usize,
}

impl Default for UhConfig {
    fn default() -> Self {
        UhConfig {
            dir_tol: 1e-6,
            angle_floor: 1e-3,
            growth_floor: 1e-3,
            horizon: 2048,
            max_horizon: 1 << 16,
            n_phases: 8,
            window: 1 << 14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UhVerdict {
    UniformlyHyperbolic,
    NotUh,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UhCertificate {
    pub verdict: UhVerdict,
    /// Unit vectors `(u_k, u_{k-1})`, one per sampled phase.
    pub unstable_section: Vec<[C64; 2]>,
    pub stable_section: Vec<[C64; 2]>,
    pub min_angle: f64,
    pub growth_rate: f64,
    /// Largest projective spread of the fans at the last horizon.
    pub direction_spread: f64,
    pub horizon: usize,
}

/// Projective distance `|det(u, v)| / (|u| |v|)`, the sine of the angle.
pub fn projective_distance(u: [C64; 2], v: [C64; 2]) -> f64 {
    let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    ((u[0] * v[1] - u[1] * v[0]).norm() / (nu * nv)).min(1.0)
}

fn normalize(v: [C64; 2]) -> ([C64; 2], f64) {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    ([v[0] / n, v[1] / n], n)
}

fn fan() -> [[C64; 2]; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    [[l, o], [o, l], normalize([l, C64::new(0.37, 0.81)]).0]
}

fn fan_spread(f: &[[C64; 2]; 3]) -> f64 {
    projective_distance(f[0], f[1]).max(projective_distance(f[0], f[2])).max(projective_distance(f[1], f[2]))
}

/// Invariant sections along a potential window.
///
/// `seq[k]` is the potential at site `k`; vectors are `(u_k, u_{k-1})`.
/// Directions are reported for sites `burn ..= seq.len() - burn`.
pub(crate) struct Sections {
    pub unstable: Vec<[C64; 2]>,
    pub stable: Vec<[C64; 2]>,
    pub spread: f64,
    /// `(1/burn) log |A_burn v|` along the forward run.
    pub growth: f64,
}

pub(crate) fn sections(seq: &[C64], e: C64, burn: usize) -> Sections {
    let len = seq.len();
    debug_assert!(len >= 2 * burn);
    let last = len - burn;
    // forward: vector at site k+1 is S(v_k) applied to the vector at site k
    let mut f = fan();
    let mut log_growth = 0.0;
    for (k, &v) in seq.iter().enumerate().take(burn) {
        let a = v - e;
        for (i, w) in f.iter_mut().enumerate() {
            let (u, n) = normalize([a * w[0] - w[1], w[0]]);
            if i == 0 {
                log_growth += n.ln();
            }
            *w = u;
        }
        let _ = k;
    }
    let mut spread = fan_spread(&f);
    let mut unstable = Vec::with_capacity(last - burn + 1);
    let mut w = f[0];
    unstable.push(w);
    for &v in &seq[burn..last] {
        let a = v - e;
        w = normalize([a * w[0] - w[1], w[0]]).0;
        unstable.push(w);
    }
    // backward: the inverse of [[a, -1], [1, 0]] is [[0, 1], [-1, a]]
    let mut b = fan();
    for &v in seq[last..].iter().rev() {
        let a = v - e;
        for w in b.iter_mut() {
            *w = normalize([w[1], a * w[1] - w[0]]).0;
        }
    }
    spread = spread.max(fan_spread(&b));
    let mut stable = vec![[C64::new(0.0, 0.0); 2]; last - burn + 1];
    let mut w = b[0];
    stable[last - burn] = w;
    for k in (burn..last).rev() {
        let a = seq[k] - e;
        w = normalize([w[1], a * w[1] - w[0]]).0;
        stable[k - burn] = w;
    }
    Sections { unstable, stable, spread, growth: log_growth / burn.max(1) as f64 }
}

/// Uniform-hyperbolicity test of the `g = 0` cocycle at energy `e`.
///
/// The horizon `N` doubles from `cfg.horizon` to `cfg.max_horizon` until both
/// fans collapse below `dir_tol`. `NotUh` is returned as soon as the
/// finite-time growth rate drops below `growth_floor`.
pub fn uh_test(base: &BaseSystem, p: &Potential, e: C64, x0: &Phase, cfg: &UhConfig) -> Result<UhCertificate> {
    p.check_compatible(base)?;
    let k = cfg.n_phases.max(1);
    let stride = (cfg.window + 2 * cfg.max_horizon) as i64;
    let starts = base.spread_phases(x0, k, stride)?;
    let mut horizon = cfg.horizon.max(16);
    loop {
        let mut unstable_section = Vec::with_capacity(k);
        let mut stable_section = Vec::with_capacity(k);
        let mut min_angle = f64::INFINITY;
        let mut spread = 0.0f64;
        let mut growth = 0.0;
        for x in &starts {
            let seq = potential_sequence(base, p, x, -(horizon as i64), cfg.window + 2 * horizon)?;
            let s = sections(&seq, e, horizon);
            for (u, v) in s.unstable.iter().zip(&s.stable) {
                min_angle = min_angle.min(projective_distance(*u, *v).asin());
            }
            spread = spread.max(s.spread);
            growth += s.growth / k as f64;
            unstable_section.push(s.unstable[0]);
            stable_section.push(s.stable[0]);
        }
        let mut cert = UhCertificate {
            verdict: UhVerdict::Inconclusive,
            unstable_section,
            stable_section,
            min_angle,
            growth_rate: growth,
            direction_spread: spread,
            horizon,
        };
        if growth < cfg.growth_floor {
            cert.verdict = UhVerdict::NotUh;
            return Ok(cert);
        }
        if spread < cfg.dir_tol && min_angle > cfg.angle_floor && growth > 0.0 {
            cert.verdict = UhVerdict::UniformlyHyperbolic;
            return Ok(cert);
        }
        if horizon >= cfg.max_horizon || (spread < cfg.dir_tol && min_angle <= cfg.angle_floor) {
            return Ok(cert);
        }
        horizon *= 2;
    }
}
