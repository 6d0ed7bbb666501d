//! Zeroth polyphase component of `h * reverse(h)`.
//!
//! For a K-fold downsampler `S` and circular blur `H`, the low-rate operator
//! `S H H^T S^T` is itself a circular filter whose taps are the samples of the
//! autocorrelation of `h` at offsets that are multiples of `K`.

use crate::error::{PnpError, Result};
use crate::imagecore::{downsample, Fft2, Image, Kernel};

/// Full linear autocorrelation `h * reverse(h)`, center-anchored.
pub fn autocorrelation(h: &Kernel) -> Kernel {
    let (w, ht) = (h.width(), h.height());
    let (ow, oh) = (2 * w - 1, 2 * ht - 1);
    let mut taps = vec![0.0; ow * oh];
    for r1 in 0..ht {
        for c1 in 0..w {
            let a = h.tap(r1, c1);
            if a == 0.0 {
                continue;
            }
            for r2 in 0..ht {
                for c2 in 0..w {
                    // offset (r1 - r2, c1 - c2), shifted to non-negative indices
                    let r = r1 + ht - 1 - r2;
                    let c = c1 + w - 1 - c2;
                    taps[r * ow + c] += a * h.tap(r2, c2);
                }
            }
        }
    }
    Kernel::new(ow, oh, taps).expect("odd autocorrelation extents")
}

/// Decimates the autocorrelation of `h` by `k`, keeping offsets that are
/// multiples of `k`. The result is symmetric under index reversal.
pub fn polyphase_zeroth(h: &Kernel, k: usize) -> Result<Kernel> {
    if k == 0 {
        return Err(PnpError::invalid("decimation factor must be >= 1"));
    }
    let full = autocorrelation(h);
    let (aw, ah) = (full.width(), full.height());
    let (ca, ra) = (aw / 2, ah / 2);
    let mx = ca / k;
    let my = ra / k;
    let (ow, oh) = (2 * mx + 1, 2 * my + 1);
    let mut taps = Vec::with_capacity(ow * oh);
    for i in 0..oh {
        for j in 0..ow {
            let r = ra as isize + (i as isize - my as isize) * k as isize;
            let c = ca as isize + (j as isize - mx as isize) * k as isize;
            taps.push(full.tap(r as usize, c as usize));
        }
    }
    Kernel::new(ow, oh, taps)
}

/// Same filter computed circularly on a `width`x`height` high-rate grid:
/// `downsample_k(IDFT(|DFT(h)|^2))`, returned as a low-rate grid image with
/// the zero offset at the origin.
pub fn polyphase_zeroth_on_grid(h: &Kernel, k: usize, width: usize, height: usize) -> Result<Image> {
    let fft = Fft2::new(width, height);
    let spec = fft.kernel_spectrum(h)?;
    let power = spec
        .iter()
        .map(|c| num_complex::Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    downsample(&fft.inverse_real(power), k)
}
