use crate::error::{PnpError, Result};
use crate::imagecore::Image;
use crate::solver::Denoiser;

use super::weights::{denoise_nlm, NlmParams};

/// `D_sigma = I`; certified with `C = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

pub fn denoise_identity(_sigma: f64, img: &Image) -> Image {
    img.clone()
}

impl Denoiser for Identity {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        Ok(denoise_identity(sigma, noisy))
    }

    fn bound_constant(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// How the NLM bandwidth follows the denoiser strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Same bandwidth for every sigma.
    Fixed(f64),
    /// Bandwidth `scale * sigma`.
    Proportional(f64),
    /// Bandwidth `sigma * sqrt(2 |P|)` for a patch of `|P|` pixels: the
    /// root of the expected squared distance between two copies of one
    /// patch under noise of std `sigma`.
    Matched,
}

/// Sinkhorn-balanced non-local means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nlm {
    pub patch_radius: usize,
    pub window_radius: usize,
    pub bandwidth: Bandwidth,
}

impl Default for Nlm {
    fn default() -> Self {
        Self {
            patch_radius: 1,
            window_radius: 3,
            bandwidth: Bandwidth::Matched,
        }
    }
}

impl Nlm {
    pub fn params(&self, sigma: f64) -> Result<NlmParams> {
        let bw = match self.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Proportional(s) => s * sigma,
            Bandwidth::Matched => {
                let side = (2 * self.patch_radius + 1) as f64;
                sigma * (2.0 * side * side).sqrt()
            }
        };
        NlmParams::new(self.patch_radius, self.window_radius, bw)
    }
}

impl Denoiser for Nlm {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        if sigma == 0.0 && !matches!(self.bandwidth, Bandwidth::Fixed(_)) {
            return Ok(noisy.clone());
        }
        denoise_nlm(&self.params(sigma)?, noisy)
    }
}

/// `D_sigma(x) = (1 - t) x + t inner(x)` with `t = min(1, sigma^2 C0)`.
///
/// For inputs in [0,1]^n and an inner smoother mapping [0,1]^n into itself,
/// `||D_sigma(x) - x||^2 / n <= t^2 <= sigma^2 C0`.
#[derive(Debug, Clone)]
pub struct DampedWrap<D> {
    inner: D,
    c0: f64,
}

impl<D: Denoiser> DampedWrap<D> {
    pub fn new(inner: D, c0: f64) -> Result<Self> {
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(PnpError::invalid(format!(
                "damping constant must be positive, got {c0}"
            )));
        }
        Ok(Self { inner, c0 })
    }

    pub fn weight(&self, sigma: f64) -> f64 {
        (sigma * sigma * self.c0).min(1.0)
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

pub fn damped_wrap<D: Denoiser>(inner: D, c0: f64) -> Result<DampedWrap<D>> {
    DampedWrap::new(inner, c0)
}

impl<D: Denoiser> Denoiser for DampedWrap<D> {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        let t = self.weight(sigma);
        if t == 0.0 {
            return Ok(noisy.clone());
        }
        let smooth = self.inner.denoise(sigma, noisy)?;
        if smooth.dims() != noisy.dims() {
            return Err(PnpError::dims("inner denoiser changed dimensions"));
        }
        if t == 1.0 {
            return Ok(smooth);
        }
        Ok(noisy.zip_map(&smooth, |x, s| (1.0 - t) * x + t * s))
    }

    fn bound_constant(&self) -> Option<f64> {
        Some(self.c0)
    }
}

/// Below this sigma the median family degenerates to the identity.
pub const MEDIAN_SIGMA_FLOOR: f64 = 0.02;

/// Circular square-window median. Sigma only gates it: below
/// [`MEDIAN_SIGMA_FLOOR`] the window shrinks to a single pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Median {
    window: usize,
}

impl Median {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 || window.is_multiple_of(2) {
            return Err(PnpError::invalid(format!("median window must be odd, got {window}")));
        }
        Ok(Self { window })
    }
}

impl Denoiser for Median {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        if sigma < MEDIAN_SIGMA_FLOOR || self.window == 1 {
            return Ok(noisy.clone());
        }
        let (w, h) = noisy.dims();
        let r = (self.window / 2) as isize;
        let mut buf = Vec::with_capacity(self.window * self.window);
        Ok(Image::from_fn(w, h, |row, col| {
            buf.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    let rr = (row as isize + dy).rem_euclid(h as isize) as usize;
                    let cc = (col as isize + dx).rem_euclid(w as isize) as usize;
                    buf.push(noisy.get(rr, cc));
                }
            }
            buf.sort_by(f64::total_cmp);
            buf[buf.len() / 2]
        }))
    }

    /// Valid for inputs in [0,1]^n: deviation is at most one per pixel and
    /// only occurs when `sigma >= MEDIAN_SIGMA_FLOOR`.
    fn bound_constant(&self) -> Option<f64> {
        Some(1.0 / (MEDIAN_SIGMA_FLOOR * MEDIAN_SIGMA_FLOOR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Image {
        Image::from_fn(8, 8, |r, c| ((r * 8 + c) % 13) as f64 / 13.0)
    }

    #[test]
    fn identity_returns_input() {
        let x = ramp();
        assert_eq!(Identity.denoise(0.7, &x).unwrap(), x);
        assert_eq!(Identity.bound_constant(), Some(0.0));
    }

    #[test]
    fn damped_limits() {
        let d = DampedWrap::new(Median::new(3).unwrap(), 4.0).unwrap();
        let x = ramp();
        assert_eq!(d.denoise(0.0, &x).unwrap(), x);
        let pure = Median::new(3).unwrap().denoise(0.5, &x).unwrap();
        assert_eq!(d.denoise(0.5, &x).unwrap(), pure);
        assert!(DampedWrap::new(Identity, 0.0).is_err());
        assert!(DampedWrap::new(Identity, -1.0).is_err());
    }

    #[test]
    fn median_gates_on_sigma() {
        let x = ramp();
        let m = Median::new(3).unwrap();
        assert_eq!(m.denoise(0.019, &x).unwrap(), x);
        assert_ne!(m.denoise(0.02, &x).unwrap(), x);
        assert!(Median::new(2).is_err());
        let c = Image::filled(5, 5, 0.4);
        assert_eq!(m.denoise(1.0, &c).unwrap(), c);
    }

    #[test]
    fn nlm_dims_and_constant_fixed_point() {
        let nlm = Nlm::default();
        let x = ramp();
        let y = nlm.denoise(0.2, &x).unwrap();
        assert_eq!(y.dims(), x.dims());
        assert!(y.is_finite());
        let c = Image::filled(8, 8, 0.6);
        assert!(nlm.denoise(0.2, &c).unwrap().max_abs_diff(&c) < 1e-12);
    }
}
