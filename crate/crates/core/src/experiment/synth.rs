//! Deterministic test scenes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PnpError, Result};
use crate::imagecore::Image;

pub const SYNTH_NAMES: [&str; 4] = ["blocks", "waves", "disks", "mixed"];

/// Renders the named scene on a `size`x`size` grid with values in [0.05, 0.95].
pub fn synthetic(name: &str, size: usize) -> Result<Image> {
    if size < 4 {
        return Err(PnpError::invalid(format!(
            "synthetic image size must be >= 4, got {size}"
        )));
    }
    let s = size as f64;
    let img = match name {
        "blocks" => Image::from_fn(size, size, |r, c| {
            let (y, x) = (r as f64 / s, c as f64 / s);
            let mut v = 0.2;
            if (0.15..0.55).contains(&x) && (0.1..0.45).contains(&y) {
                v = 0.8;
            }
            if (0.4..0.9).contains(&x) && (0.5..0.85).contains(&y) {
                v = 0.55;
            }
            if (0.65..0.8).contains(&x) && (0.15..0.35).contains(&y) {
                v = 0.95;
            }
            v
        }),
        "waves" => Image::from_fn(size, size, |r, c| {
            let (y, x) = (r as f64 / s, c as f64 / s);
            0.5 + 0.3 * (2.0 * PI * 2.0 * x).sin() * (2.0 * PI * 1.5 * y).cos() + 0.15 * (x - 0.5)
        }),
        "disks" => Image::from_fn(size, size, |r, c| {
            let (y, x) = (r as f64 / s, c as f64 / s);
            let mut v = 0.15 + 0.3 * y;
            for &(cy, cx, rad, level) in &[(0.3, 0.3, 0.18, 0.9), (0.7, 0.6, 0.22, 0.35), (0.25, 0.75, 0.12, 0.7)] {
                if (y - cy).powi(2) + (x - cx).powi(2) < rad * rad {
                    v = level;
                }
            }
            v
        }),
        "mixed" => Image::from_fn(size, size, |r, c| {
            let (y, x) = (r as f64 / s, c as f64 / s);
            let edge = if x + 0.5 * y > 0.7 { 0.3 } else { 0.0 };
            let stripes = 0.1 * (2.0 * PI * 4.0 * y).sin();
            0.3 + edge + stripes + 0.2 * x
        }),
        _ => {
            return Err(PnpError::invalid(format!(
                "unknown synthetic image {name:?} (known: {})",
                SYNTH_NAMES.join(", ")
            )))
        }
    };
    Ok(img.map(|v| v.clamp(0.05, 0.95)))
}

/// I.i.d. uniform [0,1] samples drawn from `seed`.
pub fn uniform_image(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(width, height, |_, _| rng.random::<f64>())
}
