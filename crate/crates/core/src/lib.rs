//! Plug-and-Play ADMM with penalty continuation for image restoration.
//!
//! The crate is organized bottom-up:
//!
//! - [`imagecore`]: images, kernels, circular convolution, resampling, I/O.
//! - [`forward`]: exact proximal maps for deblurring, interpolation,
//!   decimated super-resolution and binary single-photon imaging.
//! - [`denoisers`]: bounded denoisers, Sinkhorn-balanced non-local means,
//!   certification and the expansiveness probe.
//! - [`solver`]: the ADMM loop, penalty rules, traces and diagnostics.
//! - [`experiment`]: degradation simulation, end-to-end runs and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod denoisers;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod imagecore;
pub mod solver;

pub use error::{ErrorKind, PnpError, Result};
pub use imagecore::{Image, Kernel};
pub use solver::{pnp_admm, Denoiser, ForwardProblem, PnPConfig, RhoRule, SolverTrace};
