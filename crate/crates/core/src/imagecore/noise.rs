use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{PnpError, Result};

use super::Image;

/// I.i.d. zero-mean Gaussian noise. No clamping.
pub fn add_gaussian_noise(img: &Image, std: f64, seed: u64) -> Result<Image> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(PnpError::invalid(format!("noise std must be >= 0, got {std}")));
    }
    if std == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("validated std");
    Ok(img.map(|v| v + normal.sample(&mut rng)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_std_is_identity() {
        let x = Image::filled(3, 3, 0.4);
        assert_eq!(add_gaussian_noise(&x, 0.0, 7).unwrap(), x);
    }

    #[test]
    fn negative_std_rejected() {
        assert!(add_gaussian_noise(&Image::zeros(2, 2), -1.0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let x = Image::filled(16, 16, 0.5);
        let a = add_gaussian_noise(&x, 0.1, 42).unwrap();
        let b = add_gaussian_noise(&x, 0.1, 42).unwrap();
        assert_eq!(a.data(), b.data());
        let c = add_gaussian_noise(&x, 0.1, 43).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn sample_std_near_five_over_255() {
        let std = 5.0 / 255.0;
        let x = Image::filled(512, 512, 0.5);
        let y = add_gaussian_noise(&x, std, 11).unwrap();
        let d = y.sub(&x);
        let m = d.mean();
        let var = d.data().iter().map(|v| (v - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() - std).abs() / std < 0.03);
    }
}
