use std::fmt;
use std::str::FromStr;

use crate::error::{PnpError, Result};

/// How the penalty evolves between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoRule {
    /// `rho <- gamma * rho` every iteration.
    Monotone,
    /// Increase only while the relative residue fails to shrink by `eta`.
    Adaptive,
    /// Fixed penalty (the classical Plug-and-Play ADMM).
    Constant,
}

impl FromStr for RhoRule {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(RhoRule::Monotone),
            "adaptive" => Ok(RhoRule::Adaptive),
            "constant" => Ok(RhoRule::Constant),
            other => Err(PnpError::invalid(format!("unknown rho rule {other:?}"))),
        }
    }
}

impl fmt::Display for RhoRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoRule::Monotone => "monotone",
            RhoRule::Adaptive => "adaptive",
            RhoRule::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// `delta <= tol`.
    #[default]
    Residue,
    /// `max(eps1, eps2, eps3) <= tol / 3`.
    MaxComponent,
}

/// Which iterate is returned as the restored image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputVariable {
    #[default]
    V,
    X,
}

/// Above this penalty the x-update returns its input and the denoiser is
/// bypassed; both are the exact limits as `rho -> inf`.
pub const DEFAULT_RHO_CEILING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct PnPConfig {
    rho0: f64,
    lambda: f64,
    gamma: f64,
    eta: f64,
    tol: f64,
    rule: RhoRule,
    max_iter: usize,
    stop: StopCriterion,
    output: OutputVariable,
    rho_ceiling: f64,
}

impl PnPConfig {
    pub fn builder() -> PnPConfigBuilder {
        PnPConfigBuilder::default()
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }
    pub fn rule(&self) -> RhoRule {
        self.rule
    }
    pub fn max_iter(&self) -> usize {
        self.max_iter
    }
    pub fn stop(&self) -> StopCriterion {
        self.stop
    }
    pub fn output(&self) -> OutputVariable {
        self.output
    }
    pub fn rho_ceiling(&self) -> f64 {
        self.rho_ceiling
    }

    /// Returns a builder seeded with this configuration.
    pub fn to_builder(&self) -> PnPConfigBuilder {
        PnPConfigBuilder { cfg: self.clone() }
    }
}

impl Default for PnPConfig {
    fn default() -> Self {
        Self {
            rho0: 1e-5,
            lambda: 1e-4,
            gamma: 1.2,
            eta: 0.5,
            tol: 1e-3,
            rule: RhoRule::Adaptive,
            max_iter: 200,
            stop: StopCriterion::Residue,
            output: OutputVariable::V,
            rho_ceiling: DEFAULT_RHO_CEILING,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PnPConfigBuilder {
    cfg: PnPConfig,
}

impl PnPConfigBuilder {
    pub fn rho0(mut self, v: f64) -> Self {
        self.cfg.rho0 = v;
        self
    }
    pub fn lambda(mut self, v: f64) -> Self {
        self.cfg.lambda = v;
        self
    }
    pub fn gamma(mut self, v: f64) -> Self {
        self.cfg.gamma = v;
        self
    }
    pub fn eta(mut self, v: f64) -> Self {
        self.cfg.eta = v;
        self
    }
    pub fn tol(mut self, v: f64) -> Self {
        self.cfg.tol = v;
        self
    }
    pub fn rule(mut self, v: RhoRule) -> Self {
        self.cfg.rule = v;
        self
    }
    pub fn max_iter(mut self, v: usize) -> Self {
        self.cfg.max_iter = v;
        self
    }
    pub fn stop(mut self, v: StopCriterion) -> Self {
        self.cfg.stop = v;
        self
    }
    pub fn output(mut self, v: OutputVariable) -> Self {
        self.cfg.output = v;
        self
    }
    pub fn rho_ceiling(mut self, v: f64) -> Self {
        self.cfg.rho_ceiling = v;
        self
    }

    pub fn build(self) -> Result<PnPConfig> {
        let c = self.cfg;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(PnpError::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rho0", c.rho0)?;
        positive("lambda", c.lambda)?;
        positive("tol", c.tol)?;
        positive("rho ceiling", c.rho_ceiling)?;
        if !(c.gamma > 1.0) || !c.gamma.is_finite() {
            return Err(PnpError::invalid(format!("gamma must be > 1, got {}", c.gamma)));
        }
        if !(0.0..1.0).contains(&c.eta) {
            return Err(PnpError::invalid(format!("eta must lie in [0,1), got {}", c.eta)));
        }
        if c.max_iter == 0 {
            return Err(PnpError::invalid("max_iter must be positive"));
        }
        Ok(c)
    }
}
