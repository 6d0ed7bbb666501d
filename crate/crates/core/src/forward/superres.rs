use num_complex::Complex64;

use crate::error::{PnpError, Result};
use crate::imagecore::{downsample, upsample, Fft2, Image, Kernel};
use crate::solver::ForwardProblem;

use super::deblur::check_rho;
use super::polyphase::{polyphase_zeroth, polyphase_zeroth_on_grid};

/// Decimated blur `G = S H` on a circular high-resolution grid.
#[derive(Debug, Clone)]
pub struct SuperResModel {
    kernel: Kernel,
    factor: usize,
    htilde0: Kernel,
    width: usize,
    height: usize,
    fft_hi: Fft2,
    fft_lo: Fft2,
    h_spec: Vec<Complex64>,
    // DFT of the low-rate filter realizing G G^T; real and non-negative.
    ggt_eig: Vec<f64>,
}

impl SuperResModel {
    /// `width`/`height` are the high-resolution extents.
    pub fn new(kernel: Kernel, factor: usize, width: usize, height: usize) -> Result<Self> {
        if factor == 0 {
            return Err(PnpError::invalid("decimation factor must be >= 1"));
        }
        if !width.is_multiple_of(factor) || !height.is_multiple_of(factor) {
            return Err(PnpError::dims(format!(
                "{width}x{height} not divisible by factor {factor}"
            )));
        }
        let fft_hi = Fft2::new(width, height);
        let fft_lo = Fft2::new(width / factor, height / factor);
        let h_spec = fft_hi.kernel_spectrum(&kernel)?;
        let grid = polyphase_zeroth_on_grid(&kernel, factor, width, height)?;
        let ggt_eig = fft_lo.forward(&grid).iter().map(|c| c.re).collect();
        let htilde0 = polyphase_zeroth(&kernel, factor)?;
        Ok(Self {
            kernel,
            factor,
            htilde0,
            width,
            height,
            fft_hi,
            fft_lo,
            h_spec,
            ggt_eig,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn htilde0(&self) -> &Kernel {
        &self.htilde0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn low_dims(&self) -> (usize, usize) {
        (self.width / self.factor, self.height / self.factor)
    }

    /// `G x = S (h * x)`.
    pub fn apply(&self, x: &Image) -> Result<Image> {
        x.check_same_dims(&Image::zeros(self.width, self.height), "superres input")?;
        let mut s = self.fft_hi.forward(x);
        s.iter_mut().zip(&self.h_spec).for_each(|(a, h)| *a *= h);
        downsample(&self.fft_hi.inverse_real(s), self.factor)
    }

    /// `G^T w = reverse(h) * (S^T w)`.
    pub fn apply_adjoint(&self, w: &Image) -> Result<Image> {
        if w.dims() != self.low_dims() {
            return Err(PnpError::dims(format!(
                "low-res input {:?}, expected {:?}",
                w.dims(),
                self.low_dims()
            )));
        }
        let up = upsample(w, self.factor)?;
        let mut s = self.fft_hi.forward(&up);
        s.iter_mut().zip(&self.h_spec).for_each(|(a, h)| *a *= h.conj());
        Ok(self.fft_hi.inverse_real(s))
    }

    /// `G G^T w` evaluated as a single low-rate circular filter.
    pub fn apply_ggt(&self, w: &Image) -> Result<Image> {
        if w.dims() != self.low_dims() {
            return Err(PnpError::dims("low-res input has wrong dimensions"));
        }
        let spec = self
            .fft_lo
            .forward(w)
            .iter()
            .zip(&self.ggt_eig)
            .map(|(v, e)| v * e)
            .collect();
        Ok(self.fft_lo.inverse_real(spec))
    }

    /// Closed-form `argmin 1/2 ||G x - y||^2 + (rho/2) ||x - x_tilde||^2`
    /// through the Woodbury identity; the inner `m x m` inverse is diagonal
    /// in the low-rate DFT basis.
    pub fn prox(&self, y: &Image, rho: f64, x_tilde: &Image) -> Result<Image> {
        check_rho(rho)?;
        let gty = self.apply_adjoint(y)?;
        self.prox_with_gty(&gty, rho, x_tilde)
    }

    fn prox_with_gty(&self, gty: &Image, rho: f64, x_tilde: &Image) -> Result<Image> {
        if x_tilde.dims() != self.dims() {
            return Err(PnpError::dims("superres prox input has wrong dimensions"));
        }
        let b = gty.add(&x_tilde.scale(rho));
        let gb = self.apply(&b)?;
        let spec = self
            .fft_lo
            .forward(&gb)
            .iter()
            .zip(&self.ggt_eig)
            .map(|(v, e)| v / (e + rho))
            .collect();
        let inner = self.fft_lo.inverse_real(spec);
        let correction = self.apply_adjoint(&inner)?;
        Ok(b.sub(&correction).scale(1.0 / rho))
    }
}

/// Super-resolution data term bound to an observation.
#[derive(Debug, Clone)]
pub struct SuperRes {
    model: SuperResModel,
    y: Image,
    gty: Image,
}

impl SuperRes {
    pub fn new(model: SuperResModel, y: Image) -> Result<Self> {
        let gty = model.apply_adjoint(&y)?;
        Ok(Self { model, y, gty })
    }

    pub fn model(&self) -> &SuperResModel {
        &self.model
    }
}

impl ForwardProblem for SuperRes {
    fn dims(&self) -> (usize, usize) {
        self.model.dims()
    }

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image> {
        check_rho(rho)?;
        self.model.prox_with_gty(&self.gty, rho, x_tilde)
    }

    fn objective(&self, x: &Image) -> f64 {
        let gx = self.model.apply(x).expect("dims checked by caller");
        0.5 * gx.sub(&self.y).norm().powi(2)
    }

    fn gradient_bound(&self) -> Option<f64> {
        let s = self.model.kernel.l1_norm();
        let y_norm = self.y.norm() / ((self.model.width * self.model.height) as f64).sqrt();
        Some(s * (s + y_norm))
    }
}

pub fn superres_prox(model: &SuperResModel, y: &Image, rho: f64, x_tilde: &Image) -> Result<Image> {
    model.prox(y, rho, x_tilde)
}
