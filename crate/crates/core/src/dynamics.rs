//! Base transformations on compact phase spaces.
//!
//! Torus coordinates are stored in 64-bit fixed point (`Angle`), so a
//! rotation is an exact operation on `Z / 2^64 Z`: reduction mod 1 is free
//! and stepping forward then backward returns the starting phase bit for bit.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// A point of the circle `R/Z` in 64-bit fixed point.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Angle(pub u64);

impl Angle {
    /// Reduces `x` mod 1. Values that round up to the seam are snapped to 0.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite phase");
        let scaled = (x - x.floor()) * TWO_POW_64;
        if scaled >= TWO_POW_64 {
            return Angle(0);
        }
        Angle(scaled as u64)
    }

    /// Value in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        let x = self.0 as f64 / TWO_POW_64;
        if x >= 1.0 {
            0.0
        } else {
            x
        }
    }

    #[inline]
    pub fn add(self, other: Angle) -> Angle {
        Angle(self.0.wrapping_add(other.0))
    }

    #[inline]
    pub fn sub(self, other: Angle) -> Angle {
        Angle(self.0.wrapping_sub(other.0))
    }

    /// `n * self` mod 1, exact.
    #[inline]
    pub fn times(self, n: i64) -> Angle {
        Angle(self.0.wrapping_mul(n as u64))
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({})", self.to_f64())
    }
}

/// The kind of base dynamics generating the potential sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSystem {
    /// `x -> x + alpha` on the circle.
    Rotation { alpha: f64 },
    /// `(x, y) -> (x + alpha, y + x)` on the two-torus.
    SkewShift { alpha: f64 },
    /// `k -> k + 1 mod period`, sampled at `x = k / period`.
    Periodic { period: u32 },
    /// Independent values uniform on `[-half_width, half_width]`.
    Iid { seed: u64, half_width: f64 },
}

/// A point of the phase space of some [`BaseSystem`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    Torus(Angle),
    Torus2(Angle, Angle),
    Index { k: i64, period: u32 },
    Stream { seed: u64, half_width: f64, index: i64 },
}

/// Golden-mean frequency `(sqrt 5 - 1) / 2`, the default irrational.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

impl BaseSystem {
    pub fn name(&self) -> &'static str {
        match self {
            BaseSystem::Rotation { .. } => "rotation",
            BaseSystem::SkewShift { .. } => "skew_shift",
            BaseSystem::Periodic { .. } => "periodic",
            BaseSystem::Iid { .. } => "iid",
        }
    }

    /// Whether the base is a minimal, uniquely ergodic map on a connected
    /// space. The i.i.d. and periodic bases are contrast baselines only.
    pub fn is_strictly_ergodic(&self) -> bool {
        matches!(self, BaseSystem::Rotation { .. } | BaseSystem::SkewShift { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseSystem::Rotation { alpha } | BaseSystem::SkewShift { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::InvalidArgument("alpha must be finite".into()));
                }
            }
            BaseSystem::Periodic { period } => {
                if period == 0 {
                    return Err(Error::InvalidArgument("period must be positive".into()));
                }
            }
            BaseSystem::Iid { half_width, .. } => {
                if !(half_width.is_finite() && half_width >= 0.0) {
                    return Err(Error::InvalidArgument("half_width must be finite and non-negative".into()));
                }
            }
        }
        Ok(())
    }

    /// Builds a phase from plain coordinates: `coords[0]` (and `coords[1]` for
    /// the skew shift) for torus kinds, `coords[0]` rounded for index kinds.
    pub fn phase(&self, coords: &[f64]) -> Phase {
        let c0 = coords.first().copied().unwrap_or(0.0);
        let c1 = coords.get(1).copied().unwrap_or(0.0);
        match *self {
            BaseSystem::Rotation { .. } => Phase::Torus(Angle::from_f64(c0)),
            BaseSystem::SkewShift { .. } => Phase::Torus2(Angle::from_f64(c0), Angle::from_f64(c1)),
            BaseSystem::Periodic { period } => {
                Phase::Index { k: (c0.round() as i64).rem_euclid(period as i64), period }
            }
            BaseSystem::Iid { seed, half_width } => Phase::Stream { seed, half_width, index: c0.round() as i64 },
        }
    }

    fn check(&self, phase: &Phase) -> Result<()> {
        let ok = matches!(
            (self, phase),
            (BaseSystem::Rotation { .. }, Phase::Torus(_))
                | (BaseSystem::SkewShift { .. }, Phase::Torus2(..))
                | (BaseSystem::Periodic { .. }, Phase::Index { .. })
                | (BaseSystem::Iid { .. }, Phase::Stream { .. })
        );
        if ok {
            Ok(())
        } else {
            Err(Error::PhaseMismatch { base: self.name(), phase: format!("{phase:?}") })
        }
    }

    /// `T^n x`, for any integer `n`.
    pub fn step(&self, x: &Phase, n: i64) -> Result<Phase> {
        self.check(x)?;
        Ok(self.step_unchecked(x, n))
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, x: &Phase, n: i64) -> Phase {
        match (*self, *x) {
            (BaseSystem::Rotation { alpha }, Phase::Torus(a)) => Phase::Torus(a.add(Angle::from_f64(alpha).times(n))),
            (BaseSystem::SkewShift { alpha }, Phase::Torus2(a, b)) => {
                // T^n(x, y) = (x + n alpha, y + n x + n(n-1)/2 alpha)
                let al = Angle::from_f64(alpha);
                let tri = ((n as i128) * (n as i128 - 1) / 2) as i64;
                Phase::Torus2(a.add(al.times(n)), b.add(a.times(n)).add(al.times(tri)))
            }
            (BaseSystem::Periodic { period }, Phase::Index { k, .. }) => {
                Phase::Index { k: (k + n).rem_euclid(period as i64), period }
            }
            (BaseSystem::Iid { .. }, Phase::Stream { seed, half_width, index }) => {
                Phase::Stream { seed, half_width, index: index + n }
            }
            _ => unreachable!("phase checked against base"),
        }
    }

    /// `K` starting phases spread evenly over the phase space around `x0`.
    /// Stream phases are separated by `stride` indices so that their windows
    /// do not overlap.
    pub fn spread_phases(&self, x0: &Phase, count: usize, stride: i64) -> Result<Vec<Phase>> {
        self.check(x0)?;
        let count = count.max(1);
        let out = (0..count)
            .map(|j| {
                let frac = j as f64 / count as f64;
                match *x0 {
                    Phase::Torus(a) => Phase::Torus(a.add(Angle::from_f64(frac))),
                    Phase::Torus2(a, b) => {
                        Phase::Torus2(a.add(Angle::from_f64(frac)), b.add(Angle::from_f64(frac * golden_mean())))
                    }
                    Phase::Index { k, period } => Phase::Index {
                        k: (k + (j as i64 * period as i64) / count as i64).rem_euclid(period as i64),
                        period,
                    },
                    Phase::Stream { seed, half_width, index } => {
                        Phase::Stream { seed, half_width, index: index + j as i64 * stride }
                    }
                }
            })
            .collect();
        Ok(out)
    }
}

/// Phases `T^{n_from + j} x0` for `j = 0..=n_to - n_from`.
pub fn orbit(base: &BaseSystem, x0: &Phase, n_from: i64, n_to: i64) -> Result<Vec<Phase>> {
    if n_from > n_to {
        return Err(Error::BadRange { from: n_from, to: n_to });
    }
    base.check(x0)?;
    let first = base.step_unchecked(x0, n_from);
    let len = (n_to - n_from + 1) as usize;
    let mut out = Vec::with_capacity(len);
    let mut cur = first;
    for _ in 0..len {
        out.push(cur);
        cur = base.step_unchecked(&cur, 1);
    }
    Ok(out)
}

/// Value of a counter-based i.i.d. stream at `index`, uniform on
/// `[-half_width, half_width]`. Any index, negative or not, is addressable.
pub fn stream_value(seed: u64, half_width: f64, index: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Two 32-bit words per index; shift so negative indices map to valid positions.
    let pos = ((index as i128) + (1i128 << 63)) as u128 * 2;
    rng.set_word_pos(pos);
    let bits = rng.next_u64() >> 11;
    let u = bits as f64 / (1u64 << 53) as f64;
    half_width * (2.0 * u - 1.0)
}

impl Phase {
    /// Coordinate in `[0, 1)` at which a circle potential is evaluated.
    #[inline]
    pub fn circle_coordinate(&self) -> Option<f64> {
        match *self {
            Phase::Torus(a) => Some(a.to_f64()),
            Phase::Torus2(_, b) => Some(b.to_f64()),
            Phase::Index { k, period } => Some(k as f64 / period as f64),
            Phase::Stream { .. } => None,
        }
    }

    /// Plain coordinates, for reports.
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            Phase::Torus(a) => vec![a.to_f64()],
            Phase::Torus2(a, b) => vec![a.to_f64(), b.to_f64()],
            Phase::Index { k, .. } => vec![k as f64],
            Phase::Stream { index, .. } => vec![index as f64],
        }
    }
}
