use crate::error::{PnpError, Result};

use super::Image;

/// A 2-D FIR filter with an explicit anchor (the tap that sits at offset zero).
///
/// Tap `(r, c)` acts at spatial offset `(r - anchor_row, c - anchor_col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    width: usize,
    height: usize,
    taps: Vec<f64>,
    anchor_row: usize,
    anchor_col: usize,
}

impl Kernel {
    /// Center-anchored kernel. Both extents must be odd.
    pub fn new(width: usize, height: usize, taps: Vec<f64>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(PnpError::invalid(format!(
                "center-anchored kernel needs odd extents, got {width}x{height}"
            )));
        }
        Self::with_anchor(width, height, taps, height / 2, width / 2)
    }

    pub fn with_anchor(
        width: usize,
        height: usize,
        taps: Vec<f64>,
        anchor_row: usize,
        anchor_col: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 || taps.len() != width * height {
            return Err(PnpError::dims(format!(
                "kernel {width}x{height} with {} taps",
                taps.len()
            )));
        }
        if anchor_row >= height || anchor_col >= width {
            return Err(PnpError::invalid("kernel anchor outside taps"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(PnpError::invalid("kernel taps must be finite"));
        }
        Ok(Self {
            width,
            height,
            taps,
            anchor_row,
            anchor_col,
        })
    }

    pub fn delta() -> Self {
        Self {
            width: 1,
            height: 1,
            taps: vec![1.0],
            anchor_row: 0,
            anchor_col: 0,
        }
    }

    /// Normalized isotropic Gaussian on a `size`x`size` support.
    pub fn gaussian(size: usize, std: f64) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(PnpError::invalid(format!("gaussian size must be odd, got {size}")));
        }
        if !(std > 0.0) {
            return Err(PnpError::invalid(format!("gaussian std must be positive, got {std}")));
        }
        let c = (size / 2) as f64;
        let mut taps = Vec::with_capacity(size * size);
        for r in 0..size {
            for col in 0..size {
                let dy = r as f64 - c;
                let dx = col as f64 - c;
                taps.push((-(dx * dx + dy * dy) / (2.0 * std * std)).exp());
            }
        }
        Self::new(size, size, taps).map(Kernel::normalized)
    }

    /// Separable bicubic (a = -0.5) anti-aliasing filter for a factor-`k`
    /// decimation, sampled at integer offsets so that it stays zero-phase.
    pub fn bicubic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(PnpError::invalid("bicubic factor must be >= 1"));
        }
        let half = 2 * k - 1;
        let profile: Vec<f64> = (0..=2 * half)
            .map(|i| cubic((i as f64 - half as f64) / k as f64))
            .collect();
        let n = profile.len();
        let mut taps = Vec::with_capacity(n * n);
        for &a in &profile {
            for &b in &profile {
                taps.push(a * b);
            }
        }
        Self::new(n, n, taps).map(Kernel::normalized)
    }

    /// Reads the taps of an odd-sized image as a center-anchored kernel.
    pub fn from_image(img: &Image) -> Result<Self> {
        Self::new(img.width(), img.height(), img.data().to_vec())
    }

    pub fn normalized(mut self) -> Self {
        let s: f64 = self.taps.iter().sum();
        if s != 0.0 {
            self.taps.iter_mut().for_each(|t| *t /= s);
        }
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn anchor(&self) -> (usize, usize) {
        (self.anchor_row, self.anchor_col)
    }

    #[inline]
    pub fn tap(&self, row: usize, col: usize) -> f64 {
        self.taps[row * self.width + col]
    }

    /// Iterates `(dy, dx, tap)` with offsets relative to the anchor.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        (0..self.height).flat_map(move |r| {
            (0..self.width).map(move |c| {
                (
                    r as isize - self.anchor_row as isize,
                    c as isize - self.anchor_col as isize,
                    self.tap(r, c),
                )
            })
        })
    }

    /// Time reversal: tap at offset `o` moves to offset `-o`.
    pub fn reversed(&self) -> Kernel {
        let taps = self.taps.iter().rev().copied().collect();
        Kernel {
            width: self.width,
            height: self.height,
            taps,
            anchor_row: self.height - 1 - self.anchor_row,
            anchor_col: self.width - 1 - self.anchor_col,
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.abs()).sum()
    }
}

fn cubic(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        (A + 2.0) * x.powi(3) - (A + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        A * x.powi(3) - 5.0 * A * x * x + 8.0 * A * x - 4.0 * A
    } else {
        0.0
    }
}
