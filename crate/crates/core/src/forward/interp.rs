use crate::error::{PnpError, Result};
use crate::imagecore::Image;
use crate::solver::ForwardProblem;

use super::deblur::check_rho;

/// Inpainting from a binary sampling mask, `f(x) = 1/2 ||S x - y||^2`.
///
/// `y` is stored on the full grid (`S^T y`); values under a zero mask entry
/// are ignored.
#[derive(Debug, Clone)]
pub struct Interp {
    sty: Image,
    mask: Image,
}

impl Interp {
    pub fn new(y: &Image, mask: Image) -> Result<Self> {
        y.check_same_dims(&mask, "interp mask")?;
        if mask.data().iter().any(|&m| m != 0.0 && m != 1.0) {
            return Err(PnpError::invalid("sampling mask must be binary"));
        }
        Ok(Self {
            sty: y.zip_map(&mask, |a, m| a * m),
            mask,
        })
    }

    pub fn mask(&self) -> &Image {
        &self.mask
    }

    pub fn observation(&self) -> &Image {
        &self.sty
    }
}

impl ForwardProblem for Interp {
    fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image> {
        check_rho(rho)?;
        x_tilde.check_same_dims(&self.mask, "interp prox input")?;
        let data = self
            .sty
            .data()
            .iter()
            .zip(self.mask.data())
            .zip(x_tilde.data())
            .map(|((y, s), xt)| (y + rho * xt) / (s + rho))
            .collect();
        Image::new(self.mask.width(), self.mask.height(), data)
    }

    fn objective(&self, x: &Image) -> f64 {
        let r: f64 = x
            .data()
            .iter()
            .zip(self.mask.data())
            .zip(self.sty.data())
            .map(|((x, m), y)| (m * x - y).powi(2))
            .sum();
        0.5 * r
    }

    fn gradient_bound(&self) -> Option<f64> {
        Some(1.0 + self.sty.norm() / (self.sty.len() as f64).sqrt())
    }
}

/// Elementwise `(S^T y + rho x_tilde) ./ (s + rho)` with `s = diag(S^T S)`.
pub fn interp_prox(y: &Image, mask: &Image, rho: f64, x_tilde: &Image) -> Result<Image> {
    Interp::new(y, mask.clone())?.prox(rho, x_tilde)
}
