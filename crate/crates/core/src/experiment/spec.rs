use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::denoisers::DenoiserSpec;
use crate::error::{PnpError, Result};
use crate::imagecore::{read_image, Image, Kernel};
use crate::solver::PnPConfig;

use super::synth::synthetic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Deblur,
    Interp,
    SuperRes,
    Qis,
}

impl FromStr for Task {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deblur" => Ok(Task::Deblur),
            "interp" => Ok(Task::Interp),
            "superres" => Ok(Task::SuperRes),
            "qis" => Ok(Task::Qis),
            _ => Err(PnpError::invalid(format!("unknown task {s:?}"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Deblur => "deblur",
            Task::Interp => "interp",
            Task::SuperRes => "superres",
            Task::Qis => "qis",
        })
    }
}

/// Ground-truth source: an image file or `synth:<name>:<size>`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    File(PathBuf),
    Synth { name: String, size: usize },
}

impl FromStr for InputSpec {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("synth:") else {
            return Ok(InputSpec::File(PathBuf::from(s)));
        };
        let (name, size) = rest
            .split_once(':')
            .ok_or_else(|| PnpError::invalid(format!("expected synth:<name>:<size>, got {s:?}")))?;
        let size = size
            .parse()
            .map_err(|_| PnpError::invalid(format!("bad synthetic size in {s:?}")))?;
        Ok(InputSpec::Synth {
            name: name.to_string(),
            size,
        })
    }
}

impl InputSpec {
    pub fn load(&self) -> Result<Image> {
        match self {
            InputSpec::File(p) => read_image(p),
            InputSpec::Synth { name, size } => synthetic(name, *size),
        }
    }
}

/// `gauss:<size>:<std>`, `bicubic:<K>`, `delta` or `file:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Gauss { size: usize, std: f64 },
    Bicubic(usize),
    Delta,
    File(PathBuf),
}

impl FromStr for KernelSpec {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PnpError::invalid(format!("bad kernel spec {s:?}"));
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(KernelSpec::File(PathBuf::from(p)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["delta"] => Ok(KernelSpec::Delta),
            ["bicubic", k] => Ok(KernelSpec::Bicubic(k.parse().map_err(|_| bad())?)),
            ["gauss", size, std] => Ok(KernelSpec::Gauss {
                size: size.parse().map_err(|_| bad())?,
                std: std.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self {
            KernelSpec::Gauss { size, std } => Kernel::gaussian(*size, *std),
            KernelSpec::Bicubic(k) => Kernel::bicubic(*k),
            KernelSpec::Delta => Ok(Kernel::delta()),
            KernelSpec::File(p) => Kernel::from_image(&read_image(p)?),
        }
    }
}

/// Starting point `v(0)` of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitSpec {
    /// A task-specific estimate built from the measurements.
    Observation,
    /// Uniform samples in [0,1] from the given seed.
    Random(u64),
}

/// Everything needed to simulate a degradation and restore it.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub task: Task,
    pub input: InputSpec,
    /// Blur kernel; `None` picks the task default (`gauss:9:1` for deblur,
    /// `bicubic:<factor>` for superres).
    pub kernel: Option<KernelSpec>,
    /// Decimation factor (superres) or jots per axis (qis).
    pub factor: usize,
    /// Additive Gaussian noise std on the measurements.
    pub noise: f64,
    /// Seed of every random draw in the degradation.
    pub seed: u64,
    pub config: PnPConfig,
    pub denoiser: DenoiserSpec,
    /// Fraction of observed pixels (interp).
    pub keep: f64,
    /// Sensor gain (qis); defaults to the jot count per pixel.
    pub alpha: Option<f64>,
    pub init: InitSpec,
    /// Grid step of the QIS lookup table; direct root finding when `None`.
    pub lookup_step: Option<f64>,
}

impl ExperimentSpec {
    /// Defaults follow the deblurring configuration (`rho0 = 1e-5`,
    /// `lambda = 1e-4`, `damped-nlm:1000`) except for QIS, whose binary
    /// likelihood is far stiffer and needs `rho0 = 1`, `lambda = 1` and
    /// `damped-nlm:100` before the prior has any effect.
    pub fn new(task: Task, input: InputSpec) -> Self {
        let (config, c0) = match task {
            Task::Qis => (
                PnPConfig::builder()
                    .rho0(1.0)
                    .lambda(1.0)
                    .build()
                    .expect("valid QIS defaults"),
                100.0,
            ),
            _ => (PnPConfig::default(), 1000.0),
        };
        Self {
            task,
            input,
            kernel: None,
            factor: 2,
            noise: 0.0,
            seed: 0,
            config,
            denoiser: DenoiserSpec::DampedNlm { c0 },
            keep: 0.5,
            alpha: None,
            init: InitSpec::Observation,
            lookup_step: None,
        }
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        match (&self.kernel, self.task) {
            (Some(k), _) => k.clone(),
            (None, Task::Deblur) => KernelSpec::Gauss { size: 9, std: 1.0 },
            (None, Task::SuperRes) => KernelSpec::Bicubic(self.factor),
            (None, _) => KernelSpec::Delta,
        }
    }

    /// Jots per pixel for the QIS task: the per-axis factor squared.
    pub fn jots(&self) -> usize {
        self.factor * self.factor
    }

    pub fn qis_alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.jots() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factor == 0 {
            return Err(PnpError::invalid("factor must be >= 1"));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(PnpError::invalid(format!("noise std must be >= 0, got {}", self.noise)));
        }
        if !(self.keep > 0.0 && self.keep <= 1.0) {
            return Err(PnpError::invalid(format!(
                "keep fraction must be in (0,1], got {}",
                self.keep
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(PnpError::invalid(format!("alpha must be positive, got {a}")));
            }
        }
        if let Some(s) = self.lookup_step {
            if !(s > 0.0) || !s.is_finite() {
                return Err(PnpError::invalid(format!("lookup step must be positive, got {s}")));
            }
        }
        Ok(())
    }
}
