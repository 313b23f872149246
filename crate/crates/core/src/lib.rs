//! Alternating optimization for an IRS-enabled backscatter NOMA downlink.
//!
//! A single-antenna access point splits its power between a modulated
//! carrier (two NOMA users) and an unmodulated carrier that the reflecting
//! surface re-modulates with its own data. The crate provides:
//!
//! - [`channel`]: geometry, pathloss, Rician fading and CSI-error models.
//! - [`rates`]: SNR/SINR formulas and the closed-form power split and NOMA
//!   coefficients.
//! - [`sdp`]: a primal-dual interior-point solver for complex Hermitian
//!   semidefinite programs with a unit-diagonal constraint.
//! - [`phase`]: the lifted phase-shift subproblem and the rank-one penalty
//!   loop on top of [`sdp`].
//! - [`ao`]: the outer alternating-optimization loop and solution
//!   re-evaluation.
//! - [`baselines`]: random-phase and TDMA reference schemes.
//! - [`harness`]: scenario configuration, Monte-Carlo sweeps and CSV output.

// `!(x > 0.0)` is used so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod phase;
pub mod rates;
pub mod sdp;
pub mod units;

pub use error::{Error, Infeasibility, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
