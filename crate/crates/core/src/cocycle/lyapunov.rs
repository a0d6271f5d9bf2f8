//! Finite-time Lyapunov exponent estimates.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::transfer::Mat2;
use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::potential::{potential_sequence, Potential};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    pub n_steps: usize,
    pub n_phases: usize,
    pub burn_in: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig { n_steps: 10_000, n_phases: 8, burn_in: 0 }
    }
}

impl LyapunovConfig {
    pub fn with_steps(n_steps: usize) -> Self {
        LyapunovConfig { n_steps, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1000 {
            return Err(Error::InvalidArgument(format!("n_steps must be at least 1000 (got {})", self.n_steps)));
        }
        if self.n_phases == 0 {
            return Err(Error::InvalidArgument("n_phases must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Phase-averaged `(1/n) log ||A_n||`.
    pub value: f64,
    /// Cross-phase standard deviation.
    pub stderr: f64,
    /// The same estimate at `n / 2`.
    pub half_value: f64,
    pub converged: bool,
}

/// Potential samples along `n_phases` orbits, shared by every energy.
#[derive(Clone, Debug)]
pub struct PhaseSamples {
    pub seqs: Vec<Vec<C64>>,
}

impl PhaseSamples {
    pub fn new(base: &BaseSystem, p: &Potential, x0: &Phase, cfg: &LyapunovConfig) -> Result<Self> {
        cfg.validate()?;
        p.check_compatible(base)?;
        let stride = (cfg.n_steps + cfg.burn_in) as i64;
        let starts = base.spread_phases(x0, cfg.n_phases, stride)?;
        let seqs = starts
            .iter()
            .map(|x| potential_sequence(base, p, x, cfg.burn_in as i64, cfg.n_steps))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseSamples { seqs })
    }

    /// Estimate of `L_g(E)` from the stored sequences.
    pub fn estimate(&self, e: C64, g: f64) -> LyapunovEstimate {
        let damp = (-g).exp();
        let b = -(-2.0 * g).exp();
        let mut full = Vec::with_capacity(self.seqs.len());
        let mut half = Vec::with_capacity(self.seqs.len());
        let mut n = 0usize;
        for seq in &self.seqs {
            n = seq.len();
            let (h, f) = log_norm_run(seq, e, damp, b);
            half.push(h / (n / 2) as f64);
            full.push(f / n as f64);
        }
        let k = full.len() as f64;
        let value = full.iter().sum::<f64>() / k;
        let half_value = half.iter().sum::<f64>() / k;
        let stderr = if full.len() > 1 {
            (full.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        let n = n.max(2) as f64;
        let allowance = (10.0 * stderr).max(4.0 * n.ln() / n);
        LyapunovEstimate { value, stderr, half_value, converged: (value - half_value).abs() <= allowance }
    }
}

/// `log ||A_k||` at `k = len / 2` and `k = len` for the companion cocycle
/// `[[damp (v - e), b], [1, 0]]`. Specialized for a real `b`; the scale is
/// checked every 8 steps, which is safe while `|v - e| < 1e10`.
fn log_norm_run(seq: &[C64], e: C64, damp: f64, b: f64) -> (f64, f64) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (mut m00, mut m01, mut m10, mut m11) = (one, zero, zero, one);
    let mut log_scale = 0.0;
    let mid = seq.len() / 2;
    let mut half = 0.0;
    let norm = |m00: C64, m01: C64, m10: C64, m11: C64| Mat2::new(m00, m01, m10, m11).norm();
    for (k, &v) in seq.iter().enumerate() {
        if k == mid {
            half = norm(m00, m01, m10, m11).ln() + log_scale;
        }
        let a = (v - e) * damp;
        let n00 = a * m00 + m10 * b;
        let n01 = a * m01 + m11 * b;
        m10 = m00;
        m11 = m01;
        m00 = n00;
        m01 = n01;
        if k % 8 == 7 {
            let big = m00.norm_sqr().max(m01.norm_sqr()).max(m10.norm_sqr()).max(m11.norm_sqr());
            if !(1e-80..=1e80).contains(&big) && big > 0.0 {
                let s = big.sqrt();
                let inv = 1.0 / s;
                m00 *= inv;
                m01 *= inv;
                m10 *= inv;
                m11 *= inv;
                log_scale += s.ln();
            }
        }
    }
    (half, norm(m00, m01, m10, m11).ln() + log_scale)
}

/// Estimate of `L_g(E) = lim (1/n) int log ||A_n^g(x)|| dmu(x)`, averaged over
/// `cfg.n_phases` evenly spread starting phases.
pub fn lyapunov(
    base: &BaseSystem,
    p: &Potential,
    e: C64,
    g: f64,
    x0: &Phase,
    cfg: &LyapunovConfig,
) -> Result<LyapunovEstimate> {
    if !(g >= 0.0) {
        return Err(Error::InvalidArgument(format!("g must be non-negative, got {g}")));
    }
    Ok(PhaseSamples::new(base, p, x0, cfg)?.estimate(e, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::golden_mean;

    fn golden() -> BaseSystem {
        BaseSystem::Rotation { alpha: golden_mean() }
    }

    #[test]
    fn free_hyperbolic_energy() {
        let base = golden();
        let est = lyapunov(
            &base,
            &Potential::zero(),
            C64::new(3.0, 0.0),
            0.0,
            &base.phase(&[0.0]),
            &LyapunovConfig::with_steps(100_000),
        )
        .unwrap();
        let want = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((est.value - want).abs() < 1e-3, "{est:?}");
        assert!(est.converged);
    }

    #[test]
    fn free_elliptic_energy() {
        let base = golden();
        let est = lyapunov(
            &base,
            &Potential::zero(),
            C64::new(0.0, 0.0),
            0.0,
            &base.phase(&[0.0]),
            &LyapunovConfig::default(),
        )
        .unwrap();
        assert!(est.value.abs() < 1e-3);
    }

    #[test]
    fn single_exponential_plateau_at_zero() {
        let base = golden();
        let p = Potential::single_exponential(C64::new(2.0, 0.0));
        let est =
            lyapunov(&base, &p, C64::new(0.0, 0.0), 0.0, &base.phase(&[0.0]), &LyapunovConfig::default()).unwrap();
        assert!((est.value - 2f64.ln()).abs() < 5e-3, "{est:?}");
    }

    #[test]
    fn hn_exponent_is_shifted_by_g() {
        // L_g(E) = L(E) - g from the conjugation S^g = e^{-g} D S D^{-1}.
        let base = golden();
        let p = Potential::cosine(1.5);
        let x0 = base.phase(&[0.2]);
        let e = C64::new(0.4, 1.1);
        let cfg = LyapunovConfig::with_steps(20_000);
        let l0 = lyapunov(&base, &p, e, 0.0, &x0, &cfg).unwrap().value;
        let lg = lyapunov(&base, &p, e, 0.6, &x0, &cfg).unwrap().value;
        assert!((lg - (l0 - 0.6)).abs() < 1e-3, "{l0} {lg}");
    }

    #[test]
    fn rejects_short_runs() {
        let base = golden();
        let cfg = LyapunovConfig { n_steps: 10, ..Default::default() };
        assert!(lyapunov(&base, &Potential::zero(), C64::new(0.0, 0.0), 0.0, &base.phase(&[0.0]), &cfg).is_err());
    }
}
