//! Dual-polarized massive MIMO downlink with rate-splitting multiple access:
//! a Monte Carlo link simulator and the closed-form outage and ergodic-rate
//! expressions it is checked against.
//!
//! The pipeline runs bottom-up: [`channel`] builds covariances and fading
//! draws, [`precoder`] the two-stage precoders, [`schemes`] the per-scheme
//! SINRs, [`mc`] the estimators and [`analytic`] the closed forms.
//! [`runner`] ties them into sweeps and result files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod mc;
pub mod precoder;
pub mod quad;
pub mod runner;
pub mod schemes;
pub mod specfun;

pub use error::{Error, Result};
