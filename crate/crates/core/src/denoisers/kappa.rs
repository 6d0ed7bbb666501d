//! Expansiveness probe for image-dependent NLM.
//!
//! `kappa = ||D(x) - D(y)||^2 / ||x - y||^2`. With weights rebuilt from each
//! input the map is nonlinear and `kappa` can exceed one; with one shared
//! doubly stochastic matrix it cannot.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PnpError, Result};
use crate::forward::Interp;
use crate::imagecore::Image;
use crate::solver::{pnp_admm, Denoiser, PnPConfig, RhoRule};

use super::weights::{balance, denoise_nlm, nlm_weights, NlmParams};

fn denominator(x: &Image, y: &Image) -> Result<f64> {
    x.check_same_dims(y, "kappa pair")?;
    let d = x.sub(y).norm().powi(2);
    if d == 0.0 {
        return Err(PnpError::invalid("kappa undefined for identical inputs"));
    }
    Ok(d)
}

/// `kappa` with weights `W~_x` for `x` and `W~_y` for `y`.
pub fn expansiveness_kappa(x: &Image, y: &Image, params: &NlmParams) -> Result<f64> {
    let den = denominator(x, y)?;
    let dx = denoise_nlm(params, x)?;
    let dy = denoise_nlm(params, y)?;
    Ok(dx.sub(&dy).norm().powi(2) / den)
}

/// `kappa` of the linear map `W~_anchor`, shared by both inputs.
pub fn kappa_fixed_weights(x: &Image, y: &Image, params: &NlmParams, anchor: &Image) -> Result<f64> {
    let den = denominator(x, y)?;
    anchor.check_same_dims(x, "kappa anchor")?;
    let w = balance(&nlm_weights(anchor, params)?)?;
    let diff = x.sub(y);
    let out: f64 = w.matrix.apply(diff.data()).iter().map(|v| v * v).sum();
    Ok(out / den)
}

#[derive(Debug, Clone)]
pub struct KappaSearch {
    pub best_kappa: f64,
    pub best_pair: (Image, Image),
    pub candidates: usize,
}

/// Scans pairs of `pool` (closest in iteration order first) and keeps the
/// largest `kappa`. At most `max_pairs` pairs are evaluated.
pub fn kappa_search(pool: &[Image], params: &NlmParams, max_pairs: usize) -> Result<KappaSearch> {
    let denoised = pool
        .iter()
        .map(|x| denoise_nlm(params, x))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut count = 0;
    'outer: for gap in 1..pool.len() {
        for i in 0..pool.len() - gap {
            if count >= max_pairs {
                break 'outer;
            }
            let j = i + gap;
            let den = pool[i].sub(&pool[j]).norm().powi(2);
            if den == 0.0 {
                continue;
            }
            count += 1;
            let k = denoised[i].sub(&denoised[j]).norm().powi(2) / den;
            if best.is_none_or(|b| k > b.0) {
                best = Some((k, i, j));
            }
        }
    }
    let (best_kappa, i, j) = best.ok_or_else(|| PnpError::invalid("kappa search needs two distinct candidates"))?;
    Ok(KappaSearch {
        best_kappa,
        best_pair: (pool[i].clone(), pool[j].clone()),
        candidates: count,
    })
}

struct Recording<'a, D> {
    inner: &'a D,
    seen: RefCell<Vec<Image>>,
}

impl<D: Denoiser> Denoiser for Recording<'_, D> {
    fn denoise(&self, sigma: f64, noisy: &Image) -> Result<Image> {
        self.seen.borrow_mut().push(noisy.clone());
        self.inner.denoise(sigma, noisy)
    }
}

/// Settings for [`inpainting_kappa_probe`].
#[derive(Debug, Clone, Copy)]
pub struct InpaintingProbe {
    /// Fraction of observed pixels.
    pub keep: f64,
    pub rho: f64,
    pub iterations: usize,
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for InpaintingProbe {
    fn default() -> Self {
        Self {
            keep: 0.5,
            rho: 1.0,
            iterations: 40,
            max_pairs: 1000,
            seed: 0,
        }
    }
}

/// Runs constant-penalty PnP-ADMM with the NLM denoiser on a random-mask
/// inpainting of `truth` and searches the denoiser inputs it produced for an
/// expansive pair.
pub fn inpainting_kappa_probe(truth: &Image, params: &NlmParams, probe: &InpaintingProbe) -> Result<KappaSearch> {
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let mask = truth.map(|_| if rng.random::<f64>() < probe.keep { 1.0 } else { 0.0 });
    let problem = Interp::new(truth, mask)?;
    let fixed = FixedNlm(*params);
    let rec = Recording {
        inner: &fixed,
        seen: RefCell::new(Vec::new()),
    };
    let cfg = PnPConfig::builder()
        .rho0(probe.rho)
        .rule(RhoRule::Constant)
        .max_iter(probe.iterations)
        .tol(1e-12)
        .build()?;
    let init = problem.observation().clone();
    pnp_admm(&problem, &rec, &cfg, &init)?;
    let pool = rec.seen.into_inner();
    kappa_search(&pool, params, probe.max_pairs)
}

struct FixedNlm(NlmParams);

impl Denoiser for FixedNlm {
    fn denoise(&self, _sigma: f64, noisy: &Image) -> Result<Image> {
        denoise_nlm(&self.0, noisy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_rejected() {
        let x = Image::from_fn(6, 6, |r, c| ((r + 2 * c) % 5) as f64 / 5.0);
        let p = NlmParams::new(1, 2, 0.2).unwrap();
        assert!(expansiveness_kappa(&x, &x, &p).is_err());
        assert!(kappa_fixed_weights(&x, &x, &p, &x).is_err());
    }
}
