use crate::error::{PnpError, Result};

use super::Image;

/// Keeps samples whose row and column indices are both multiples of `k`.
pub fn downsample(img: &Image, k: usize) -> Result<Image> {
    if k == 0 {
        return Err(PnpError::invalid("resampling factor must be >= 1"));
    }
    let (w, h) = img.dims();
    if w % k != 0 || h % k != 0 {
        return Err(PnpError::dims(format!("{w}x{h} image not divisible by factor {k}")));
    }
    Ok(Image::from_fn(w / k, h / k, |r, c| img.get(r * k, c * k)))
}

/// Zero insertion; the adjoint of [`downsample`].
pub fn upsample(img: &Image, k: usize) -> Result<Image> {
    if k == 0 {
        return Err(PnpError::invalid("resampling factor must be >= 1"));
    }
    let (w, h) = img.dims();
    let mut out = Image::zeros(w * k, h * k);
    for r in 0..h {
        for c in 0..w {
            out.set(r * k, c * k, img.get(r, c));
        }
    }
    Ok(out)
}

/// Pixel replication, used to seed iterates from low-resolution data.
pub fn replicate(img: &Image, k: usize) -> Result<Image> {
    if k == 0 {
        return Err(PnpError::invalid("resampling factor must be >= 1"));
    }
    let (w, h) = img.dims();
    Ok(Image::from_fn(w * k, h * k, |r, c| img.get(r / k, c / k)))
}
