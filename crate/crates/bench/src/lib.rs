//! Benchmarks for `hn-spectra`; see `benches/kernels.rs`.

use hn_spectra::{golden_mean, BaseSystem, Phase};

/// Golden-mean rotation started at the origin, shared by all benchmarks.
pub fn golden() -> (BaseSystem, Phase) {
    let b = BaseSystem::Rotation { alpha: golden_mean() };
    let x = b.phase(&[0.0]);
    (b, x)
}
