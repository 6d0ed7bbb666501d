//! Binary single-photon (quanta image sensor) imaging.
//!
//! Each pixel owns a contiguous block of `K` jots. Jot `i` of pixel `j` sees
//! `Z ~ Poisson(alpha * x_j / K)` photons and reports the bit `Z >= 1`.
//! The negative log-likelihood of pixel `j` given `K0_j` zeros and `K1_j`
//! ones is
//!
//! ```text
//! f_j(x) = K0_j * alpha * x / K - K1_j * ln(1 - exp(-alpha * x / K))
//! ```
//!
//! which is convex, so the proximal map separates into 1-D root finds.

use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{PnpError, Result};
use crate::imagecore::Image;
use crate::solver::ForwardProblem;

use super::deblur::check_rho;

/// Simulated jot outputs, `bits[j * jots + i]` for pixel `j`, jot `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitField {
    width: usize,
    height: usize,
    jots: usize,
    bits: Vec<u8>,
}

impl BitField {
    pub fn new(width: usize, height: usize, jots: usize, bits: Vec<u8>) -> Result<Self> {
        if jots == 0 {
            return Err(PnpError::invalid("jots per pixel must be >= 1"));
        }
        if bits.len() != width * height * jots {
            return Err(PnpError::dims(format!(
                "bit field of {} entries for {width}x{height} pixels with {jots} jots",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(PnpError::invalid("bits must be 0 or 1"));
        }
        Ok(Self {
            width,
            height,
            jots,
            bits,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn jots(&self) -> usize {
        self.jots
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Spatial layout for storage: each pixel becomes an `a`x`a` block
    /// (`a * a = jots`), jot `i` at block position `(i / a, i % a)`.
    pub fn to_image(&self) -> Result<Image> {
        let a = square_side(self.jots)?;
        let mut img = Image::zeros(self.width * a, self.height * a);
        for j in 0..self.width * self.height {
            let (pr, pc) = (j / self.width, j % self.width);
            for i in 0..self.jots {
                let v = self.bits[j * self.jots + i] as f64;
                img.set(pr * a + i / a, pc * a + i % a, v);
            }
        }
        Ok(img)
    }

    /// Inverse of [`BitField::to_image`]; samples above 1/2 read as ones.
    pub fn from_image(img: &Image, jots_per_axis: usize) -> Result<Self> {
        let a = jots_per_axis;
        if a == 0 || !img.width().is_multiple_of(a) || !img.height().is_multiple_of(a) {
            return Err(PnpError::dims(format!(
                "{}x{} bit image not divisible by {a}",
                img.width(),
                img.height()
            )));
        }
        let (w, h) = (img.width() / a, img.height() / a);
        let jots = a * a;
        let mut bits = vec![0u8; w * h * jots];
        for j in 0..w * h {
            let (pr, pc) = (j / w, j % w);
            for i in 0..jots {
                bits[j * jots + i] = u8::from(img.get(pr * a + i / a, pc * a + i % a) > 0.5);
            }
        }
        Self::new(w, h, jots, bits)
    }
}

fn square_side(jots: usize) -> Result<usize> {
    let a = (jots as f64).sqrt().round() as usize;
    if a * a != jots {
        return Err(PnpError::invalid(format!(
            "{jots} jots per pixel is not a square block"
        )));
    }
    Ok(a)
}

/// Draws the binary jot responses. Each pixel uses its own ChaCha stream so
/// the result does not depend on how pixels are scheduled.
pub fn qis_simulate(x: &Image, jots: usize, alpha: f64, seed: u64) -> Result<BitField> {
    if jots == 0 {
        return Err(PnpError::invalid("jots per pixel must be >= 1"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(PnpError::invalid(format!("sensor gain must be positive, got {alpha}")));
    }
    if x.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(PnpError::invalid("QIS scene must lie in [0,1]"));
    }
    let bits: Vec<u8> = x
        .data()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(j, &xj)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let rate = alpha * xj / jots as f64;
            let poisson = (rate > 0.0).then(|| Poisson::new(rate).expect("positive finite rate"));
            (0..jots)
                .map(move |_| match &poisson {
                    Some(p) => u8::from(p.sample(&mut rng) >= 1.0),
                    None => 0,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    BitField::new(x.width(), x.height(), jots, bits)
}

/// Per-pixel counts of ones and zeros over contiguous jot blocks.
pub fn qis_counts(bits: &[u8], jots: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    if jots == 0 || !bits.len().is_multiple_of(jots) {
        return Err(PnpError::dims(format!(
            "{} bits cannot be split into blocks of {jots}",
            bits.len()
        )));
    }
    let k1: Vec<u32> = bits
        .chunks_exact(jots)
        .map(|b| b.iter().map(|&v| u32::from(v != 0)).sum())
        .collect();
    let k0 = k1.iter().map(|&o| jots as u32 - o).collect();
    Ok((k1, k0))
}

/// Sufficient statistics of a QIS capture.
#[derive(Debug, Clone, PartialEq)]
pub struct QisObservation {
    width: usize,
    height: usize,
    jots: usize,
    alpha: f64,
    k1: Vec<u32>,
    k0: Vec<u32>,
}

impl QisObservation {
    pub fn new(width: usize, height: usize, jots: usize, alpha: f64, k1: Vec<u32>) -> Result<Self> {
        if jots == 0 {
            return Err(PnpError::invalid("jots per pixel must be >= 1"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(PnpError::invalid(format!("sensor gain must be positive, got {alpha}")));
        }
        if k1.len() != width * height {
            return Err(PnpError::dims("count vector length does not match image"));
        }
        if k1.iter().any(|&o| o as usize > jots) {
            return Err(PnpError::invalid("count of ones exceeds jots per pixel"));
        }
        let k0 = k1.iter().map(|&o| jots as u32 - o).collect();
        Ok(Self {
            width,
            height,
            jots,
            alpha,
            k1,
            k0,
        })
    }

    pub fn from_bits(bits: &BitField, alpha: f64) -> Result<Self> {
        let (k1, _) = qis_counts(&bits.bits, bits.jots)?;
        Self::new(bits.width, bits.height, bits.jots, alpha, k1)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
    pub fn jots(&self) -> usize {
        self.jots
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn ones(&self) -> &[u32] {
        &self.k1
    }
    pub fn zeros(&self) -> &[u32] {
        &self.k0
    }
}

/// Scalar parameters of one pixel's proximal subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QisPixel {
    pub jots: usize,
    pub alpha: f64,
    pub zeros: u32,
    pub rho: f64,
    pub x_tilde: f64,
}

impl QisPixel {
    fn ones(&self) -> u32 {
        self.jots as u32 - self.zeros
    }

    /// `f_j(x) + (rho/2)(x - x_tilde)^2`; `+inf` at `x <= 0` when any jot fired.
    pub fn objective(&self, x: f64) -> f64 {
        let k = self.jots as f64;
        let t = self.alpha * x / k;
        let ones = self.ones() as f64;
        let data = if ones > 0.0 {
            if x <= 0.0 {
                return f64::INFINITY;
            }
            -ones * (-(-t).exp_m1()).ln()
        } else {
            0.0
        };
        self.zeros as f64 * t + data + 0.5 * self.rho * (x - self.x_tilde).powi(2)
    }

    /// Derivative of [`QisPixel::objective`].
    fn slope(&self, x: f64) -> f64 {
        let k = self.jots as f64;
        let a = self.alpha / k;
        let t = a * x;
        a * self.zeros as f64 - a * self.ones() as f64 / t.exp_m1() + self.rho * (x - self.x_tilde)
    }

    fn curvature(&self, x: f64) -> f64 {
        let a = self.alpha / self.jots as f64;
        let inv = 1.0 / (a * x).exp_m1();
        a * a * self.ones() as f64 * inv * (1.0 + inv) + self.rho
    }

    /// Residual of `K e^{-ax}(alpha + rho(x - xt)) = alpha K0 + rho K (x - xt)`.
    pub fn stationarity_residual(&self, x: f64) -> f64 {
        let k = self.jots as f64;
        let d = x - self.x_tilde;
        k * (-self.alpha * x / k).exp() * (self.alpha + self.rho * d)
            - self.alpha * self.zeros as f64
            - self.rho * k * d
    }

    /// Unconstrained minimizer on `x > 0` (or on the real line when no jot fired).
    pub fn root(&self, pixel: usize) -> Result<f64> {
        let ar = self.alpha / self.rho;
        if self.ones() == 0 {
            return Ok(self.x_tilde - ar);
        }
        let mut lo = (self.x_tilde - ar - 1.0).max(1e-12);
        let mut hi = self.x_tilde.max(1.0) + ar + 1.0;
        let mut tries = 0;
        while self.slope(lo) >= 0.0 {
            lo *= 0.5;
            tries += 1;
            if tries > 2000 || lo == 0.0 {
                return Err(PnpError::Bracketing { pixel });
            }
        }
        tries = 0;
        while self.slope(hi) <= 0.0 {
            hi = 2.0 * hi + 1.0;
            tries += 1;
            if tries > 200 || !hi.is_finite() {
                return Err(PnpError::Bracketing { pixel });
            }
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..2 {
            let g = self.slope(x);
            let step = g / self.curvature(x);
            let cand = x - step;
            if cand.is_finite() && cand > 0.0 && self.slope(cand).abs() <= g.abs() {
                x = cand;
            }
        }
        Ok(x)
    }
}

/// Precomputed unconstrained minimizers on a uniform `x_tilde` grid for one
/// `(rho, alpha, K)`; queries interpolate linearly in `x_tilde`.
#[derive(Debug, Clone)]
pub struct QisLookup {
    rho: f64,
    alpha: f64,
    jots: usize,
    start: f64,
    step: f64,
    // tables[k0][i] at x_tilde = start + i * step
    tables: Vec<Vec<f64>>,
}

/// Largest table (entries summed over all zero counts) a build will allocate.
pub const MAX_LOOKUP_ENTRIES: usize = 50_000_000;

pub fn qis_lookup_build(alpha: f64, jots: usize, rho: f64, grid_step: f64) -> Result<QisLookup> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(PnpError::invalid(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    check_rho(rho)?;
    if jots == 0 || !(alpha > 0.0) {
        return Err(PnpError::invalid("lookup needs jots >= 1 and alpha > 0"));
    }
    let start = -alpha / rho - 1.0;
    let n = ((2.0 - start) / grid_step).ceil() as usize + 1;
    if n.saturating_mul(jots + 1) > MAX_LOOKUP_ENTRIES {
        return Err(PnpError::invalid(format!(
            "lookup table of {} entries exceeds limit; use direct root finding at rho={rho}",
            n.saturating_mul(jots + 1)
        )));
    }
    let tables = (0..=jots as u32)
        .map(|zeros| {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    QisPixel {
                        jots,
                        alpha,
                        zeros,
                        rho,
                        x_tilde: start + i as f64 * grid_step,
                    }
                    .root(i)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QisLookup {
        rho,
        alpha,
        jots,
        start,
        step: grid_step,
        tables,
    })
}

impl QisLookup {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn grid_len(&self) -> usize {
        self.tables.first().map_or(0, Vec::len)
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn entry(&self, zeros: u32, i: usize) -> f64 {
        self.tables[zeros as usize][i]
    }

    fn matches(&self, alpha: f64, jots: usize, rho: f64) -> bool {
        self.alpha == alpha && self.jots == jots && self.rho == rho
    }

    /// Interpolated unconstrained root, or `None` outside the grid.
    pub fn query(&self, zeros: u32, x_tilde: f64) -> Option<f64> {
        let table = self.tables.get(zeros as usize)?;
        let pos = (x_tilde - self.start) / self.step;
        if !(pos >= 0.0) || pos > (table.len() - 1) as f64 {
            return None;
        }
        let i = (pos.floor() as usize).min(table.len() - 2);
        let f = pos - i as f64;
        Some(table[i] * (1.0 - f) + table[i + 1] * f)
    }
}

/// Pixelwise proximal map of the QIS likelihood, clamped to [0,1].
pub fn qis_prox(obs: &QisObservation, rho: f64, x_tilde: &Image, lookup: Option<&QisLookup>) -> Result<Image> {
    check_rho(rho)?;
    if x_tilde.dims() != obs.dims() {
        return Err(PnpError::dims("QIS prox input has wrong dimensions"));
    }
    if let Some(l) = lookup {
        if !l.matches(obs.alpha, obs.jots, rho) {
            return Err(PnpError::invalid("lookup table built for different (rho, alpha, K)"));
        }
    }
    let data = x_tilde
        .data()
        .par_iter()
        .zip(obs.k0.par_iter())
        .enumerate()
        .map(|(j, (&xt, &zeros))| {
            let px = QisPixel {
                jots: obs.jots,
                alpha: obs.alpha,
                zeros,
                rho,
                x_tilde: xt,
            };
            let root = match lookup.and_then(|l| l.query(zeros, xt)) {
                Some(r) => r,
                None => px.root(j)?,
            };
            Ok(root.clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Image::new(obs.width, obs.height, data)
}

/// Closed-form maximum-likelihood estimate `-(K/alpha) ln(K0/K)`, clamped;
/// pixels with no zeros saturate to 1.
pub fn qis_mle(obs: &QisObservation) -> Image {
    let k = obs.jots as f64;
    let data = obs
        .k0
        .iter()
        .map(|&z| {
            if z == 0 {
                1.0
            } else {
                (-(k / obs.alpha) * (z as f64 / k).ln()).clamp(0.0, 1.0)
            }
        })
        .collect();
    Image::new(obs.width, obs.height, data).expect("finite MLE")
}

/// QIS data term for the ADMM loop. With a lookup step set, tables are
/// rebuilt whenever `rho` changes; oversized tables fall back to direct roots.
#[derive(Debug)]
pub struct Qis {
    obs: QisObservation,
    lookup_step: Option<f64>,
    cache: Mutex<Option<QisLookup>>,
}

impl Qis {
    pub fn new(obs: QisObservation) -> Self {
        Self {
            obs,
            lookup_step: None,
            cache: Mutex::new(None),
        }
    }

    pub fn with_lookup(mut self, grid_step: f64) -> Self {
        self.lookup_step = Some(grid_step);
        self
    }

    pub fn observation(&self) -> &QisObservation {
        &self.obs
    }
}

impl ForwardProblem for Qis {
    fn dims(&self) -> (usize, usize) {
        self.obs.dims()
    }

    fn prox(&self, rho: f64, x_tilde: &Image) -> Result<Image> {
        let Some(step) = self.lookup_step else {
            return qis_prox(&self.obs, rho, x_tilde, None);
        };
        let mut cache = self.cache.lock().expect("lookup cache poisoned");
        let stale = cache.as_ref().is_none_or(|l| l.rho != rho);
        if stale {
            *cache = qis_lookup_build(self.obs.alpha, self.obs.jots, rho, step).ok();
        }
        qis_prox(&self.obs, rho, x_tilde, cache.as_ref())
    }

    fn objective(&self, x: &Image) -> f64 {
        x.data()
            .iter()
            .zip(&self.obs.k0)
            .map(|(&xj, &zeros)| {
                QisPixel {
                    jots: self.obs.jots,
                    alpha: self.obs.alpha,
                    zeros,
                    rho: 0.0,
                    x_tilde: 0.0,
                }
                .objective(xj)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dark_scene_gives_zero_bits() {
        let bits = qis_simulate(&Image::zeros(4, 4), 9, 9.0, 1).unwrap();
        assert!(bits.bits().iter().all(|&b| b == 0));
    }

    #[test]
    fn simulation_is_deterministic() {
        let x = Image::from_fn(6, 5, |r, c| ((r + c) % 4) as f64 / 4.0);
        let a = qis_simulate(&x, 4, 4.0, 7).unwrap();
        let b = qis_simulate(&x, 4, 4.0, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, qis_simulate(&x, 4, 4.0, 8).unwrap());
    }

    #[test]
    fn simulation_validates() {
        let x = Image::filled(2, 2, 0.5);
        assert!(qis_simulate(&x, 0, 1.0, 0).is_err());
        assert!(qis_simulate(&x, 4, 0.0, 0).is_err());
        assert!(qis_simulate(&Image::filled(2, 2, 1.5), 4, 4.0, 0).is_err());
    }

    #[test]
    fn counts_extremes_and_length() {
        let (k1, k0) = qis_counts(&[0; 12], 4).unwrap();
        assert_eq!((k1, k0), (vec![0; 3], vec![4; 3]));
        let (k1, k0) = qis_counts(&[1; 12], 4).unwrap();
        assert_eq!((k1, k0), (vec![4; 3], vec![0; 3]));
        assert!(qis_counts(&[0; 10], 4).is_err());
    }

    #[test]
    fn bit_image_round_trip() {
        let x = Image::from_fn(3, 2, |r, c| (r + c) as f64 / 4.0);
        let bits = qis_simulate(&x, 9, 9.0, 3).unwrap();
        let img = bits.to_image().unwrap();
        assert_eq!(img.dims(), (9, 6));
        assert_eq!(BitField::from_image(&img, 3).unwrap(), bits);
        let odd = qis_simulate(&x, 3, 3.0, 3).unwrap();
        assert!(odd.to_image().is_err());
    }

    #[test]
    fn no_ones_is_shifted_closed_form() {
        let obs = QisObservation::new(3, 1, 4, 4.0, vec![0, 0, 0]).unwrap();
        let xt = Image::new(3, 1, vec![0.2, 0.9, 5.0]).unwrap();
        let rho = 10.0;
        let out = qis_prox(&obs, rho, &xt, None).unwrap();
        for (o, t) in out.data().iter().zip(xt.data()) {
            assert_eq!(*o, (t - 4.0 / rho).clamp(0.0, 1.0));
        }
    }

    #[test]
    fn mle_extremes() {
        let obs = QisObservation::new(2, 1, 4, 4.0, vec![0, 4]).unwrap();
        let m = qis_mle(&obs);
        assert_eq!(m.data(), &[0.0, 1.0]);
    }

    #[test]
    fn root_satisfies_stationarity() {
        let px = QisPixel {
            jots: 9,
            alpha: 9.0,
            zeros: 4,
            rho: 0.8,
            x_tilde: 0.3,
        };
        let x = px.root(0).unwrap();
        assert!(px.stationarity_residual(x).abs() <= 1e-9);
        assert!(px.objective(x) <= px.objective(x + 1e-6));
        assert!(px.objective(x) <= px.objective(x - 1e-6));
    }

    #[test]
    fn lookup_rejects_bad_step() {
        assert!(qis_lookup_build(4.0, 4, 1.0, 0.0).is_err());
        assert!(qis_lookup_build(4.0, 4, 1.0, -1.0).is_err());
        assert!(qis_lookup_build(4.0, 4, 1e-9, 1e-3).is_err());
    }

    #[test]
    fn lookup_no_ones_column_is_exact() {
        let l = qis_lookup_build(4.0, 4, 2.0, 1e-2).unwrap();
        for i in (0..l.grid_len()).step_by(37) {
            let xt = l.grid_point(i);
            assert!((l.entry(4, i) - (xt - 2.0)).abs() < 1e-12);
        }
    }
}
