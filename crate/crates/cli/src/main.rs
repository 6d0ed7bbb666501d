use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pnp_core::denoisers::{
    certify_bounded, inpainting_kappa_probe, kappa_fixed_weights, DenoiserSpec, InpaintingProbe, NlmParams,
};
use pnp_core::experiment::{
    run_experiment, summarize, sweep, sweep_csv, uniform_image, ExperimentSpec, InitSpec, InputSpec, KernelSpec,
    SweepParam, Task,
};
use pnp_core::imagecore::{write_image, Image};
use pnp_core::solver::{OutputVariable, RhoRule, StopCriterion};
use pnp_core::{ErrorKind, PnpError};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "pnp", version, about = "Plug-and-Play ADMM image restoration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-blind deblurring of a simulated blurred, noisy image.
    Deblur(RunArgs),
    /// Inpainting from a random subset of pixels.
    Interp(RunArgs),
    /// Super-resolution from a blurred, decimated image.
    Superres(RunArgs),
    /// Reconstruction from simulated binary single-photon (QIS) data.
    Qis(RunArgs),
    /// Searches for an expansive pair of image-dependent NLM inputs.
    Kappa(KappaArgs),
    /// Checks the bounded-denoiser inequality on random inputs.
    Certify(CertifyArgs),
    /// Repeats a restoration over a list of parameter values.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Ground truth: an image path (PGM/PFM) or synth:<name>:<size>.
    #[arg(long)]
    input: String,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// monotone, adaptive or constant.
    #[arg(long)]
    rule: Option<RhoRule>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// identity, nlm:<patch>:<window>, damped-nlm:<C0> or median:<w>.
    #[arg(long)]
    denoiser: Option<DenoiserSpec>,
    /// gauss:<size>:<std>, bicubic:<K>, delta or file:<path>.
    #[arg(long)]
    kernel: Option<KernelSpec>,
    /// Decimation factor (superres) or jots per axis (qis).
    #[arg(long, default_value_t = 2)]
    factor: usize,
    /// Std of additive Gaussian noise on the measurements.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of observed pixels (interp).
    #[arg(long, default_value_t = 0.5)]
    keep: f64,
    /// Sensor gain (qis); defaults to the number of jots per pixel.
    #[arg(long)]
    alpha: Option<f64>,
    /// Use a QIS lookup table with this grid step instead of root finding.
    #[arg(long)]
    lookup_step: Option<f64>,
    /// Start from uniform noise with this seed instead of the measurements.
    #[arg(long)]
    init_seed: Option<u64>,
    /// Stop on max(eps1, eps2, eps3) <= tol/3 instead of delta <= tol.
    #[arg(long)]
    stop_max_eps: bool,
    /// Return the x iterate instead of v.
    #[arg(long)]
    output_x: bool,
    /// Trace CSV destination.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Restored image destination (.pfm for float, PGM otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes the measurement-only estimate (QIS: the MLE).
    #[arg(long)]
    observed: Option<PathBuf>,
    /// Writes the QIS bit field as a 0/255 PGM.
    #[arg(long)]
    bits: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long, default_value = "synth:disks:32")]
    input: String,
    #[arg(long, default_value_t = 1)]
    patch: usize,
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// NLM bandwidth used for every denoiser call.
    #[arg(long, default_value_t = 0.1)]
    bandwidth: f64,
    #[arg(long, default_value_t = 0.5)]
    keep: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 40)]
    iterations: usize,
    #[arg(long, default_value_t = 1000)]
    max_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, default_value = "damped-nlm:1000")]
    denoiser: DenoiserSpec,
    /// Constant to test; defaults to the denoiser's declared constant.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 16)]
    size: usize,
    /// Number of random [0,1] input images.
    #[arg(long, default_value_t = 10)]
    inputs: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.03,0.1,0.3,1")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// deblur, interp, superres or qis.
    task: Task,
    /// tol, rho0, seed or rule.
    #[arg(long)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    run: RunArgs,
}

fn build_spec(task: Task, a: &RunArgs) -> Result<ExperimentSpec, PnpError> {
    let mut spec = ExperimentSpec::new(task, a.input.parse::<InputSpec>()?);
    let mut b = spec.config.to_builder();
    if let Some(v) = a.rho0 {
        b = b.rho0(v);
    }
    if let Some(v) = a.lambda {
        b = b.lambda(v);
    }
    if let Some(v) = a.gamma {
        b = b.gamma(v);
    }
    if let Some(v) = a.eta {
        b = b.eta(v);
    }
    if let Some(v) = a.tol {
        b = b.tol(v);
    }
    if let Some(v) = a.rule {
        b = b.rule(v);
    }
    if let Some(v) = a.max_iter {
        b = b.max_iter(v);
    }
    if a.stop_max_eps {
        b = b.stop(StopCriterion::MaxComponent);
    }
    if a.output_x {
        b = b.output(OutputVariable::X);
    }
    spec.config = b.build()?;
    if let Some(d) = a.denoiser {
        spec.denoiser = d;
    }
    spec.kernel = a.kernel.clone();
    spec.factor = a.factor;
    spec.noise = a.noise;
    spec.seed = a.seed;
    spec.keep = a.keep;
    spec.alpha = a.alpha;
    spec.lookup_step = a.lookup_step;
    if let Some(s) = a.init_seed {
        spec.init = InitSpec::Random(s);
    }
    spec.validate()?;
    Ok(spec)
}

fn restore(task: Task, a: &RunArgs) -> Result<(), PnpError> {
    let spec = build_spec(task, a)?;
    let out = run_experiment(&spec)?;
    out.write(a.out.as_deref(), a.trace.as_deref())?;
    if let Some(p) = &a.observed {
        write_image(&out.baseline.clamp01(), p)?;
    }
    if let (Some(p), Some(bits)) = (&a.bits, &out.bits) {
        write_image(&bits.to_image()?, p)?;
    }
    let label = if task == Task::Qis { "mle" } else { "observed" };
    eprintln!("{label}_psnr={:.4} stopped={}", out.baseline_psnr, out.solution.stopped);
    println!("{}", out.summary_line());
    Ok(())
}

fn kappa(a: &KappaArgs) -> Result<(), PnpError> {
    let truth = a.input.parse::<InputSpec>()?.load()?;
    let params = NlmParams::new(a.patch, a.window, a.bandwidth)?;
    let probe = InpaintingProbe {
        keep: a.keep,
        rho: a.rho,
        iterations: a.iterations,
        max_pairs: a.max_pairs,
        seed: a.seed,
    };
    let found = inpainting_kappa_probe(&truth, &params, &probe)?;
    let (x, y) = &found.best_pair;
    let fixed = kappa_fixed_weights(x, y, &params, x)?;
    println!("kappa={:.6}", found.best_kappa);
    println!("fixed_weight_kappa={fixed:.6}");
    println!("pairs={}", found.candidates);
    println!("expansive={}", found.best_kappa > 1.0);
    Ok(())
}

fn certify(a: &CertifyArgs) -> Result<(), PnpError> {
    let den = a.denoiser.build()?;
    let c = match a.c.or(den.bound_constant()) {
        Some(c) => c,
        None => {
            return Err(PnpError::InvalidParameter(
                "denoiser declares no bound constant; pass --c".into(),
            ))
        }
    };
    let inputs: Vec<Image> = (0..a.inputs as u64)
        .map(|i| uniform_image(a.size, a.size, a.seed.wrapping_add(i)))
        .collect();
    let r = certify_bounded(&den, c, &inputs, &a.sigmas)?;
    println!("c={c}");
    println!("max_ratio={:.6}", r.max_ratio);
    println!("worst_input={} worst_sigma={}", r.worst.0, r.worst.1);
    println!("evaluations={}", r.evaluations);
    println!("pass={}", r.pass);
    Ok(())
}

fn run_sweep(a: &SweepArgs) -> Result<(), PnpError> {
    let spec = build_spec(a.task, &a.run)?;
    let rows = sweep(&spec, a.param, &a.values, a.trials)?;
    let csv = sweep_csv(a.param, &rows);
    match &a.run.out {
        Some(p) => fs::write(p, &csv).map_err(|source| PnpError::Io {
            path: p.clone(),
            source,
        })?,
        None => print!("{csv}"),
    }
    for s in summarize(&rows) {
        eprintln!(
            "{}={} mean_psnr={:.4} std_psnr={:.4} trials={}",
            a.param, s.value, s.mean_psnr, s.std_psnr, s.trials
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Deblur(a) => restore(Task::Deblur, a),
        Command::Interp(a) => restore(Task::Interp, a),
        Command::Superres(a) => restore(Task::SuperRes, a),
        Command::Qis(a) => restore(Task::Qis, a),
        Command::Kappa(a) => kappa(a),
        Command::Certify(a) => certify(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}
