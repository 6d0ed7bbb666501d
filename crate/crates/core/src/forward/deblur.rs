use num_complex::Complex64;

use crate::error::{PnpError, Result};
use crate::imagecore::{circ_conv, Fft2, Image, Kernel};
use crate::solver::ForwardProblem;

/// Non-blind circular deblurring, `f(x) = 1/2 ||h * x - y||^2`.
#[derive(Debug, Clone)]
pub struct Deblur {
    y: Image,
    kernel: Kernel,
    fft: Fft2,
    h_spec: Vec<Complex64>,
    // conj(F(h)) F(y)
    hty_spec: Vec<Complex64>,
}

impl Deblur {
    pub fn new(y: Image, kernel: Kernel) -> Result<Self> {
        let fft = Fft2::new(y.width(), y.height());
        let h_spec = fft.kernel_spectrum(&kernel)?;
        let hty_spec = fft
            .forward(&y)
            .iter()
            .zip(&h_spec)
            .map(|(yv, h)| h.conj() * yv)
            .collect();
        Ok(Self {
            y,
            kernel,
            fft,
            h_spec,
            hty_spec,
        })
    }

    pub fn observation(&self) -> &Image {
        &self.y
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(PnpError::invalid(format!("rho must be positive, got {rho}")))
    }
}

impl ForwardProblem for Deblur {
    fn dims(&self) -> (usize, usize) {
        self.y.dims()
    }

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image> {
        check_rho(rho)?;
        x_tilde.check_same_dims(&self.y, "deblur prox input")?;
        let xt = self.fft.forward(x_tilde);
        let spec = xt
            .iter()
            .zip(&self.hty_spec)
            .zip(&self.h_spec)
            .map(|((x, hty), h)| (hty + x * rho) / (h.norm_sqr() + rho))
            .collect();
        Ok(self.fft.inverse_real(spec))
    }

    fn objective(&self, x: &Image) -> f64 {
        let hx = circ_conv(x, &self.kernel).expect("kernel validated at construction");
        0.5 * hx.sub(&self.y).norm().powi(2)
    }

    fn gradient_bound(&self) -> Option<f64> {
        let s = self.kernel.l1_norm();
        let y_rms = self.y.norm() / (self.y.len() as f64).sqrt();
        Some(s * (s + y_rms))
    }
}

/// Exact minimizer of `1/2 ||h * x - y||^2 + (rho/2) ||x - x_tilde||^2`.
pub fn deblur_prox(y: &Image, h: &Kernel, rho: f64, x_tilde: &Image) -> Result<Image> {
    Deblur::new(y.clone(), h.clone())?.prox(rho, x_tilde)
}
