//! Numerical toolkit for the spectrum of the Hatano-Nelson operator
//!
//! ```text
//! [H(g) u]_n = -e^{g} u_{n+1} - e^{-g} u_{n-1} + v(T^n x) u_n
//! ```
//!
//! with potentials sampled along the orbit of a base transformation `T`.
//! The crate computes Lyapunov exponents of the transfer-matrix cocycle over
//! the complex energy plane, assembles the infinite-volume spectrum from the
//! level sets of the Lyapunov exponent, diagonalizes finite truncations, and
//! checks density-of-states and Green's function identities numerically.

pub mod cocycle;
pub mod dos;
pub mod dynamics;
pub mod error;
pub mod finite;
pub mod grid;
pub mod io;
pub mod potential;
pub mod resolvent;
pub mod spectral;

pub use num_complex::Complex64 as C64;

pub use cocycle::{
    lyapunov, lyapunov_field, transfer_product, uh_test, LyapunovConfig, LyapunovEstimate, LyapunovField, Mat2,
    ProductAccumulator, UhCertificate, UhConfig, UhVerdict,
};
pub use dos::{
    bl_distance, dos_density_from_l, empirical_dos, log_potential, support_vs_spectrum, thouless_check,
    EmpiricalMeasure, ThoulessReport,
};
pub use dynamics::{golden_mean, orbit, Angle, BaseSystem, Phase};
pub use error::{Error, Result};
pub use finite::{
    build, charpoly_eval, dirichlet_g_invariance, eigenvalues, Boundary, EigenMethod, EigenOptions, EigenResult,
    FiniteOperator,
};
pub use grid::GridSpec;
pub use potential::{sample_potential, Potential, PotentialForm};
pub use resolvent::{decay_fit, green_forward, green_hyperbolic, GreenConfig, GreenWindow};
pub use spectral::{
    assemble_spectrum, count_contours, real_spectrum_sigma0, transition_report, Regime, Sigma0Config, SpectrumSet,
    TransitionReport,
};
