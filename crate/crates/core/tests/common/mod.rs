#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pnp_core::{Image, Kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| rng.random::<f64>())
}

/// Odd-sized kernel with positive taps summing to one.
pub fn random_kernel(rng: &mut ChaCha8Rng, max_side: usize) -> Kernel {
    let pick = |rng: &mut ChaCha8Rng| 2 * rng.random_range(0..=max_side / 2) + 1;
    let (w, h) = (pick(rng), pick(rng));
    let taps: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>() + 0.01).collect();
    Kernel::new(w, h, taps).unwrap().normalized()
}

pub fn to_vec(img: &Image) -> DVector<f64> {
    DVector::from_column_slice(img.data())
}

pub fn from_vec(v: &DVector<f64>, w: usize, h: usize) -> Image {
    Image::new(w, h, v.iter().copied().collect()).unwrap()
}

/// Circulant matrix of `out[p] = sum_o k[o] x[p - o]` on a `w`x`h` torus,
/// pixels in row-major order.
pub fn conv_matrix(k: &Kernel, w: usize, h: usize) -> DMatrix<f64> {
    let n = w * h;
    let mut m = DMatrix::zeros(n, n);
    for r in 0..h {
        for c in 0..w {
            for (dy, dx, t) in k.offsets() {
                let sr = (r as isize - dy).rem_euclid(h as isize) as usize;
                let sc = (c as isize - dx).rem_euclid(w as isize) as usize;
                m[(r * w + c, sr * w + sc)] += t;
            }
        }
    }
    m
}

/// Keeps pixels at rows and columns that are multiples of `k`.
pub fn decimation_matrix(k: usize, w: usize, h: usize) -> DMatrix<f64> {
    let (lw, lh) = (w / k, h / k);
    let mut s = DMatrix::zeros(lw * lh, w * h);
    for r in 0..lh {
        for c in 0..lw {
            s[(r * lw + c, r * k * w + c * k)] = 1.0;
        }
    }
    s
}

/// `(G^T G + rho I)^{-1} (G^T y + rho x_tilde)` by dense LU.
pub fn dense_prox(g: &DMatrix<f64>, y: &DVector<f64>, rho: f64, x_tilde: &DVector<f64>) -> DVector<f64> {
    let n = g.ncols();
    let a = g.transpose() * g + DMatrix::identity(n, n) * rho;
    let b = g.transpose() * y + x_tilde * rho;
    a.lu().solve(&b).expect("nonsingular normal equations")
}

pub fn rel_err(a: &Image, b: &Image) -> f64 {
    a.sub(b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v.sqrt())
}
