use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forward::{qis_mle, qis_simulate, BitField, Deblur, Interp, Qis, QisObservation, SuperRes, SuperResModel};
use crate::imagecore::{add_gaussian_noise, circ_conv, psnr, replicate, write_image, Image};
use crate::solver::{pnp_admm_with_reference, ForwardProblem, Solution};

use super::spec::{ExperimentSpec, InitSpec, Task};
use super::synth::uniform_image;

// Keeps the mask draw independent of the noise draw from the same seed.
const MASK_STREAM: u64 = 1;

/// Simulated measurements for one experiment.
pub struct Degraded {
    pub truth: Image,
    pub problem: Box<dyn ForwardProblem + Send + Sync>,
    /// Naive estimate from the measurements alone (blurred image, observed
    /// pixels with holes filled, replicated low-res image, or QIS MLE).
    pub baseline: Image,
    /// Raw jot bits (qis only).
    pub bits: Option<BitField>,
}

/// Runs the forward model and noise on the ground truth.
pub fn degrade(spec: &ExperimentSpec, truth: Image) -> Result<Degraded> {
    spec.validate()?;
    let (w, h) = truth.dims();
    Ok(match spec.task {
        Task::Deblur => {
            let kernel = spec.kernel_spec().build()?;
            let y = add_gaussian_noise(&circ_conv(&truth, &kernel)?, spec.noise, spec.seed)?;
            Degraded {
                truth,
                baseline: y.clone(),
                problem: Box::new(Deblur::new(y, kernel)?),
                bits: None,
            }
        }
        Task::Interp => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(MASK_STREAM);
            let mask = Image::from_fn(w, h, |_, _| if rng.random::<f64>() < spec.keep { 1.0 } else { 0.0 });
            let noisy = add_gaussian_noise(&truth, spec.noise, spec.seed)?;
            let y = noisy.zip_map(&mask, |v, m| v * m);
            let seen = mask.data().iter().filter(|&&m| m > 0.0).count();
            let fill = if seen == 0 {
                0.5
            } else {
                y.data().iter().sum::<f64>() / seen as f64
            };
            let baseline = y.zip_map(&mask, |v, m| if m > 0.0 { v } else { fill });
            Degraded {
                truth,
                baseline,
                problem: Box::new(Interp::new(&y, mask)?),
                bits: None,
            }
        }
        Task::SuperRes => {
            let kernel = spec.kernel_spec().build()?;
            let model = SuperResModel::new(kernel, spec.factor, w, h)?;
            let y = add_gaussian_noise(&model.apply(&truth)?, spec.noise, spec.seed)?;
            Degraded {
                truth,
                baseline: replicate(&y, spec.factor)?,
                problem: Box::new(SuperRes::new(model, y)?),
                bits: None,
            }
        }
        Task::Qis => {
            let alpha = spec.qis_alpha();
            let bits = qis_simulate(&truth, spec.jots(), alpha, spec.seed)?;
            let obs = QisObservation::from_bits(&bits, alpha)?;
            let baseline = qis_mle(&obs);
            let qis = Qis::new(obs);
            let qis = match spec.lookup_step {
                Some(step) => qis.with_lookup(step),
                None => qis,
            };
            Degraded {
                truth,
                baseline,
                problem: Box::new(qis),
                bits: Some(bits),
            }
        }
    })
}

/// Result of [`run_experiment`].
pub struct ExperimentOutcome {
    pub truth: Image,
    pub baseline: Image,
    pub baseline_psnr: f64,
    pub bits: Option<BitField>,
    pub solution: Solution,
    pub final_psnr: f64,
}

impl ExperimentOutcome {
    pub fn restored(&self) -> &Image {
        &self.solution.image
    }

    pub fn iterations(&self) -> usize {
        self.solution.trace.len()
    }

    pub fn final_delta(&self) -> f64 {
        self.solution.trace.last().map_or(0.0, |r| r.delta)
    }

    /// `final_psnr,iters,final_delta`.
    pub fn summary_line(&self) -> String {
        format!(
            "{:.4},{},{:.6e}",
            self.final_psnr,
            self.iterations(),
            self.final_delta()
        )
    }

    /// Writes the restored image and the trace CSV where requested.
    pub fn write(&self, image: Option<&Path>, trace: Option<&Path>) -> Result<()> {
        if let Some(p) = image {
            write_image(self.restored(), p)?;
        }
        if let Some(p) = trace {
            self.solution.trace.write_csv(p)?;
        }
        Ok(())
    }
}

pub fn initial_image(spec: &ExperimentSpec, degraded: &Degraded) -> Image {
    match spec.init {
        InitSpec::Observation => degraded.baseline.clone(),
        InitSpec::Random(seed) => {
            let (w, h) = degraded.truth.dims();
            uniform_image(w, h, seed)
        }
    }
}

/// Loads the input, simulates the measurements and restores them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let truth = spec.input.load()?;
    run_on(spec, truth)
}

/// [`run_experiment`] with the ground truth supplied directly.
pub fn run_on(spec: &ExperimentSpec, truth: Image) -> Result<ExperimentOutcome> {
    let degraded = degrade(spec, truth)?;
    let denoiser = spec.denoiser.build()?;
    let init = initial_image(spec, &degraded);
    let solution = pnp_admm_with_reference(&degraded.problem, &denoiser, &spec.config, &init, Some(&degraded.truth))?;
    let final_psnr = psnr(&solution.image, &degraded.truth)?;
    let baseline_psnr = psnr(&degraded.baseline.clamp01(), &degraded.truth)?;
    Ok(ExperimentOutcome {
        truth: degraded.truth,
        baseline: degraded.baseline,
        baseline_psnr,
        bits: degraded.bits,
        solution,
        final_psnr,
    })
}
