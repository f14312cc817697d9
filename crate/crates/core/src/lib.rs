//! Spectral solver for the Cauchy problem of semilinear elliptic equations
//! on a cylinder `(0, a) × box`, with kernel-based regularization and
//! numerical checks of the Gevrey-type convergence criterion.
//!
//! Modules, bottom up:
//! - [`spectral`]: Dirichlet eigenbasis of `-Δ` on a box, sample/coefficient transforms.
//! - [`forward`]: exact mild solution, its x-derivative, manufactured cases.
//! - [`kernel`]: regularizing kernel, noisy data, regularized solution.
//! - [`gevrey`]: Gevrey/Sobolev norms, criterion `A`, its bounds.
//! - [`harness`]: experiment configuration, sweeps, CSV/JSON output.

pub mod error;
pub mod forward;
pub mod gevrey;
pub mod harness;
pub mod kernel;
pub mod logspace;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
