//! Circular convolution through 2-D DFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{PnpError, Result};

use super::{Image, Kernel};

/// Planned forward/inverse 2-D DFT for one grid size.
#[derive(Clone)]
pub struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn forward(&self, img: &Image) -> Vec<Complex64> {
        debug_assert_eq!(img.dims(), (self.width, self.height));
        let mut buf: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.row_fwd, &self.col_fwd);
        buf
    }

    /// Inverse transform, keeping the real part. Includes the `1/n` scaling.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Image {
        self.transform(&mut spec, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.width * self.height) as f64;
        let data = spec.into_iter().map(|c| c.re * scale).collect();
        Image::new(self.width, self.height, data).expect("inverse DFT of finite spectrum")
    }

    fn transform(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (w, h) = (self.width, self.height);
        rows.process(buf);
        let mut t = vec![Complex64::new(0.0, 0.0); w * h];
        for r in 0..h {
            for c in 0..w {
                t[c * h + r] = buf[r * w + c];
            }
        }
        cols.process(&mut t);
        for c in 0..w {
            for r in 0..h {
                buf[r * w + c] = t[c * h + r];
            }
        }
    }

    /// Eigenvalues of the circulant operator that convolves with `k` on this grid.
    pub fn kernel_spectrum(&self, k: &Kernel) -> Result<Vec<Complex64>> {
        let grid = kernel_to_grid(k, self.width, self.height)?;
        Ok(self.forward(&grid))
    }
}

/// Embeds `k` in a `width`x`height` grid with the anchor at the origin and
/// negative offsets wrapped around.
pub fn kernel_to_grid(k: &Kernel, width: usize, height: usize) -> Result<Image> {
    check_fits(k, width, height)?;
    let mut grid = Image::zeros(width, height);
    for (dy, dx, t) in k.offsets() {
        let r = dy.rem_euclid(height as isize) as usize;
        let c = dx.rem_euclid(width as isize) as usize;
        let cur = grid.get(r, c);
        grid.set(r, c, cur + t);
    }
    Ok(grid)
}

fn check_fits(k: &Kernel, width: usize, height: usize) -> Result<()> {
    if k.width() > width || k.height() > height {
        return Err(PnpError::dims(format!(
            "kernel {}x{} larger than image {width}x{height}",
            k.width(),
            k.height()
        )));
    }
    Ok(())
}

/// Circular convolution `out[p] = sum_o k[o] * img[p - o]`.
pub fn circ_conv(img: &Image, k: &Kernel) -> Result<Image> {
    let fft = Fft2::new(img.width(), img.height());
    let kspec = fft.kernel_spectrum(k)?;
    Ok(apply_spectrum(&fft, img, &kspec))
}

/// Multiplies the DFT of `img` by `spec` and transforms back.
pub fn apply_spectrum(fft: &Fft2, img: &Image, spec: &[Complex64]) -> Image {
    let mut s = fft.forward(img);
    s.iter_mut().zip(spec).for_each(|(a, b)| *a *= b);
    fft.inverse_real(s)
}
