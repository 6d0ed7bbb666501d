//! Bounded denoisers, Sinkhorn-balanced non-local means, empirical
//! certification of the boundedness inequality and the expansiveness probe.

mod certify;
mod kappa;
mod plugins;
mod weights;

use std::str::FromStr;

pub use certify::{certify_bounded, CertificationReport};
pub use kappa::{
    expansiveness_kappa, inpainting_kappa_probe, kappa_fixed_weights, kappa_search, InpaintingProbe, KappaSearch,
};
pub use plugins::{damped_wrap, denoise_identity, Bandwidth, DampedWrap, Identity, Median, Nlm, MEDIAN_SIGMA_FLOOR};
pub use weights::{
    balance, balance_symmetric, denoise_nlm, nlm_weights, sinkhorn_knopp, Balanced, NlmParams, WeightMatrix,
    SINKHORN_MAX_SWEEPS, SINKHORN_TOL,
};

use crate::error::{PnpError, Result};
use crate::solver::Denoiser;

/// Parsed denoiser selector: `identity`, `nlm:<patch>:<window>`,
/// `damped-nlm:<C0>` or `median:<w>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenoiserSpec {
    Identity,
    Nlm { patch: usize, window: usize },
    DampedNlm { c0: f64 },
    Median { window: usize },
}

impl FromStr for DenoiserSpec {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || PnpError::invalid(format!("bad denoiser spec {s:?}"));
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["identity"] => Ok(DenoiserSpec::Identity),
            ["nlm", p, w] => Ok(DenoiserSpec::Nlm {
                patch: int(p)?,
                window: int(w)?,
            }),
            ["damped-nlm", c] => {
                let c0: f64 = c.parse().map_err(|_| bad())?;
                if !(c0 > 0.0) {
                    return Err(bad());
                }
                Ok(DenoiserSpec::DampedNlm { c0 })
            }
            ["median", w] => {
                let window = int(w)?;
                Median::new(window)?;
                Ok(DenoiserSpec::Median { window })
            }
            _ => Err(bad()),
        }
    }
}

impl DenoiserSpec {
    pub fn build(&self) -> Result<Box<dyn Denoiser + Send + Sync>> {
        Ok(match *self {
            DenoiserSpec::Identity => Box::new(Identity),
            DenoiserSpec::Nlm { patch, window } => Box::new(Nlm {
                patch_radius: patch,
                window_radius: window,
                bandwidth: Bandwidth::Matched,
            }),
            DenoiserSpec::DampedNlm { c0 } => Box::new(DampedWrap::new(Nlm::default(), c0)?),
            DenoiserSpec::Median { window } => Box::new(Median::new(window)?),
        })
    }
}
