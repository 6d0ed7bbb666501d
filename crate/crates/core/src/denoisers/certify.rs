use crate::error::{PnpError, Result};
use crate::imagecore::Image;
use crate::solver::Denoiser;

/// Outcome of an empirical boundedness check.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    /// Largest `(||D_sigma(x) - x||^2 / n) / (sigma^2 C)` seen.
    pub max_ratio: f64,
    /// Index into the input set and sigma of the worst pair.
    pub worst: (usize, f64),
    pub evaluations: usize,
    pub pass: bool,
}

/// Evaluates the bounded-denoiser inequality on every `(input, sigma)` pair.
/// A zero budget `sigma^2 C` admits only exact identity outputs.
pub fn certify_bounded<D: Denoiser + ?Sized>(
    denoiser: &D,
    c: f64,
    inputs: &[Image],
    sigmas: &[f64],
) -> Result<CertificationReport> {
    if inputs.is_empty() || sigmas.is_empty() {
        return Err(PnpError::invalid("certification needs inputs and sigmas"));
    }
    let mut max_ratio = 0.0f64;
    let mut worst = (0, sigmas[0]);
    for (i, x) in inputs.iter().enumerate() {
        for &s in sigmas {
            let out = denoiser.denoise(s, x)?;
            let dev = out.rms_distance(x).powi(2);
            let budget = s * s * c;
            let ratio = if dev == 0.0 {
                0.0
            } else if budget > 0.0 {
                dev / budget
            } else {
                f64::INFINITY
            };
            if ratio > max_ratio {
                max_ratio = ratio;
                worst = (i, s);
            }
        }
    }
    Ok(CertificationReport {
        max_ratio,
        worst,
        evaluations: inputs.len() * sigmas.len(),
        pass: max_ratio <= 1.0,
    })
}
