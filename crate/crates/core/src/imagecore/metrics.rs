use crate::error::Result;

use super::Image;

/// Returned by [`psnr`] for identical images.
pub const PSNR_IDENTICAL: f64 = f64::INFINITY;

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_dims(b, "mse")?;
    let ss: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(ss / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB with peak 1.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(PSNR_IDENTICAL);
    }
    Ok(-10.0 * m.log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_infinite() {
        let a = Image::filled(4, 4, 0.2);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_IDENTICAL);
    }

    #[test]
    fn uniform_error_of_point_one() {
        let a = Image::filled(4, 4, 0.2);
        let b = Image::filled(4, 4, 0.3);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn matches_formula() {
        let a = Image::from_fn(5, 3, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0);
        let b = Image::from_fn(5, 3, |r, c| ((r * 5 + c * 2) % 9) as f64 / 8.0);
        let mut s = 0.0;
        for i in 0..15 {
            s += (a.data()[i] - b.data()[i]).powi(2);
        }
        let want = 10.0 * (1.0 / (s / 15.0)).log10();
        assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn dims_checked() {
        assert!(psnr(&Image::zeros(2, 2), &Image::zeros(3, 2)).is_err());
    }
}
