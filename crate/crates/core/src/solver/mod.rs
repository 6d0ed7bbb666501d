//! The Plug-and-Play ADMM engine with penalty continuation.

mod admm;
mod config;
mod trace;

pub use admm::{pnp_admm, pnp_admm_with_reference, relative_residue, update_rho, PnPState, Residue, Solution};
pub use config::{OutputVariable, PnPConfig, PnPConfigBuilder, RhoRule, StopCriterion, DEFAULT_RHO_CEILING};
pub use trace::{analyze_trace, check_stop, sqrt_rho_envelope, SolverTrace, TraceFit, TraceRow, TRACE_CSV_HEADER};

use crate::error::Result;
use crate::imagecore::Image;

/// A data-fidelity term `f` that can evaluate its proximal map
/// `argmin_x f(x) + (rho/2) ||x - x_tilde||^2`.
pub trait ForwardProblem {
    /// `(width, height)` of the unknown image.
    fn dims(&self) -> (usize, usize);

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image>;

    /// Value of `f` at `x`.
    fn objective(&self, x: &Image) -> f64;

    /// Bound `L` on `||grad f(x)|| / sqrt(n)` over `[0,1]^n`, when finite.
    fn gradient_bound(&self) -> Option<f64> {
        None
    }
}

/// A denoiser `D_sigma`.
pub trait Denoiser {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image>;

    /// Certified `C` with `||D_sigma(x) - x||^2 / n <= sigma^2 C`, if any.
    fn bound_constant(&self) -> Option<f64> {
        None
    }
}

impl<D: Denoiser + ?Sized> Denoiser for Box<D> {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        (**self).denoise(sigma, noisy)
    }

    fn bound_constant(&self) -> Option<f64> {
        (**self).bound_constant()
    }
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        (**self).denoise(sigma, noisy)
    }

    fn bound_constant(&self) -> Option<f64> {
        (**self).bound_constant()
    }
}

impl<P: ForwardProblem + ?Sized> ForwardProblem for Box<P> {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image> {
        (**self).prox(rho, x_tilde)
    }

    fn objective(&self, x: &Image) -> f64 {
        (**self).objective(x)
    }

    fn gradient_bound(&self) -> Option<f64> {
        (**self).gradient_bound()
    }
}
