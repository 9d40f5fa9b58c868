//! Gaussian covariance-matrix toolkit for detecting non-Markovian dynamics through
//! backflows of steering and entanglement.

// negated float comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod channels;
pub mod error;
pub mod evolutions;
pub mod oracles;
pub mod qbm;
pub mod symplectic;
pub mod witnesses;

pub use channels::GaussianChannel;
pub use error::{Error, Result};
pub use evolutions::{
    noise_profile_oscillating, noise_profile_rational, noise_profile_rational_scaled, uniform_grid,
    Evolution, EvolutionKind, NmVerdict, Setup,
};
pub use qbm::{QbmCoefficients, QbmParams};
pub use symplectic::{
    ghz_w_state, is_physical, symplectic_eigenvalues, two_mode_squeezed, Bipartition,
    CovarianceMatrix,
};
pub use witnesses::{
    detect_backflows, entanglement_ppt, steerability, BackflowReport, Direction, WitnessTrace,
};
