//! Transfer-matrix cocycles, Lyapunov exponents and uniform hyperbolicity.

mod field;
mod lyapunov;
mod transfer;
mod uh;

pub use field::{lyapunov_field, LyapunovField};
pub use lyapunov::{lyapunov, LyapunovConfig, LyapunovEstimate, PhaseSamples};
pub use transfer::{transfer_product, Mat2, ProductAccumulator};
pub(crate) use uh::sections;
pub use uh::{projective_distance, uh_test, UhCertificate, UhConfig, UhVerdict};
