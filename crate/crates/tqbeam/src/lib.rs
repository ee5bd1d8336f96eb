//! Statistics-only outer beamformer design for the two-stage massive MIMO
//! downlink, together with the competing designs it is benchmarked against
//! and a seeded Monte-Carlo harness that evaluates them at link level.
//!
//! The transmitter splits its precoder into an outer beamformer `V_g`
//! (designed per user group from channel covariance matrices alone) and an
//! inner beamformer `W_g` (zero-forcing or regularized zero-forcing on the
//! effective channel `H_g V_g`). The crate provides:
//!
//! - [`spectral`]: dense complex Hermitian eigendecomposition, generalized
//!   Hermitian-definite eigendecomposition, thin SVD, and PSD square roots;
//! - [`channel`]: one-ring covariance construction and reproducibly seeded
//!   correlated Rayleigh channel sampling;
//! - [`outer`]: the trace-quotient outer beamformer solver plus the
//!   generalized-eigenvector, fixed-weight difference, and block
//!   diagonalization baselines;
//! - [`inner`]: ZF/RZF inner beamformers with unit-norm columns;
//! - [`metrics`]: per-realization SINR/SLNR, sum rate, signal and leakage
//!   powers, and the deterministic SLNR lower bound;
//! - [`harness`]: experiment configuration, Monte-Carlo sweeps, and CSV/JSON
//!   emission behind the `tqbeam` CLI.

pub mod channel;
pub mod error;
pub mod harness;
pub mod inner;
pub mod metrics;
pub mod outer;
pub mod spectral;

pub use error::{Error, Result};
