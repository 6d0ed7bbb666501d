use crate::error::{PnpError, Result};
use crate::imagecore::{psnr, Image};

use super::{check_stop, Denoiser, ForwardProblem, OutputVariable, PnPConfig, RhoRule, SolverTrace, TraceRow};

/// Iterate triplet plus penalty. `u` is the scaled multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct PnPState {
    pub x: Image,
    pub v: Image,
    pub u: Image,
    pub rho: f64,
    pub k: usize,
}

impl PnPState {
    pub fn initial(init: &Image, rho0: f64) -> Self {
        Self {
            x: init.clone(),
            v: init.clone(),
            u: Image::zeros(init.width(), init.height()),
            rho: rho0,
            k: 0,
        }
    }

    /// `||x - v|| / sqrt(n)`.
    pub fn primal_gap(&self) -> f64 {
        self.x.rms_distance(&self.v)
    }
}

/// Normalized successive differences of the three iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
}

impl Residue {
    pub fn delta(&self) -> f64 {
        self.eps1 + self.eps2 + self.eps3
    }
}

pub fn relative_residue(prev: &PnPState, next: &PnPState) -> Result<Residue> {
    for (a, b, what) in [
        (&prev.x, &next.x, "x"),
        (&prev.v, &next.v, "v"),
        (&prev.u, &next.u, "u"),
    ] {
        a.check_same_dims(b, what)?;
    }
    prev.x.check_same_dims(&prev.v, "x vs v")?;
    prev.x.check_same_dims(&prev.u, "x vs u")?;
    Ok(Residue {
        eps1: prev.x.rms_distance(&next.x),
        eps2: prev.v.rms_distance(&next.v),
        eps3: prev.u.rms_distance(&next.u),
    })
}

/// Next penalty. The adaptive rule increases on `delta_new >= eta * delta_old`.
pub fn update_rho(cfg: &PnPConfig, rho: f64, delta_new: f64, delta_old: f64) -> f64 {
    match cfg.rule() {
        RhoRule::Monotone => cfg.gamma() * rho,
        RhoRule::Adaptive => {
            if delta_new >= cfg.eta() * delta_old {
                cfg.gamma() * rho
            } else {
                rho
            }
        }
        RhoRule::Constant => rho,
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// The selected iterate, clamped to [0,1].
    pub image: Image,
    pub state: PnPState,
    pub trace: SolverTrace,
    /// Whether the stopping rule fired before `max_iter`.
    pub stopped: bool,
}

pub fn pnp_admm<P, D>(problem: &P, denoiser: &D, cfg: &PnPConfig, init: &Image) -> Result<Solution>
where
    P: ForwardProblem + ?Sized,
    D: Denoiser + ?Sized,
{
    pnp_admm_with_reference(problem, denoiser, cfg, init, None)
}

/// Runs the solver, recording PSNR of the selected iterate against
/// `reference` in every trace row when one is supplied.
pub fn pnp_admm_with_reference<P, D>(
    problem: &P,
    denoiser: &D,
    cfg: &PnPConfig,
    init: &Image,
    reference: Option<&Image>,
) -> Result<Solution>
where
    P: ForwardProblem + ?Sized,
    D: Denoiser + ?Sized,
{
    if init.dims() != problem.dims() {
        return Err(PnpError::dims(format!(
            "initial image {:?} vs problem {:?}",
            init.dims(),
            problem.dims()
        )));
    }
    if let Some(r) = reference {
        r.check_same_dims(init, "reference image")?;
    }

    let mut state = PnPState::initial(init, cfg.rho0());
    let mut trace = SolverTrace::default();
    // Undefined before the first step; zero makes the first adaptive test increase rho.
    let mut delta_old = 0.0;
    let mut stopped = false;
    let wrap = |iteration: usize| {
        move |e: PnpError| PnpError::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    for k in 1..=cfg.max_iter() {
        let rho = state.rho;
        let sigma = (cfg.lambda() / rho).sqrt();
        let saturated = !(rho < cfg.rho_ceiling());

        let x_tilde = state.v.sub(&state.u);
        let x = if saturated {
            x_tilde
        } else {
            problem.prox(rho, &x_tilde).map_err(wrap(k))?
        };
        if !x.is_finite() {
            return Err(PnpError::NonFinite {
                what: "x",
                iteration: k,
            });
        }
        let v_tilde = x.add(&state.u);
        let v = if saturated {
            v_tilde
        } else {
            denoiser.denoise(sigma, &v_tilde).map_err(wrap(k))?
        };
        if v.dims() != x.dims() {
            return Err(wrap(k)(PnpError::dims("denoiser changed image dimensions")));
        }
        if !v.is_finite() {
            return Err(PnpError::NonFinite {
                what: "v",
                iteration: k,
            });
        }
        let u = state.u.add(&x).sub(&v);

        let next = PnPState { x, v, u, rho, k };
        let res = relative_residue(&state, &next)?;
        let delta = res.delta();
        if !delta.is_finite() {
            return Err(PnpError::NonFinite {
                what: "residue",
                iteration: k,
            });
        }
        let psnr_k = match reference {
            Some(r) => Some(psnr(&select(&next, cfg.output()), r)?),
            None => None,
        };
        let row = TraceRow {
            k,
            rho,
            sigma,
            delta,
            eps1: res.eps1,
            eps2: res.eps2,
            eps3: res.eps3,
            psnr: psnr_k,
        };
        trace.rows.push(row);

        state = next;
        state.rho = update_rho(cfg, rho, delta, delta_old);
        delta_old = delta;

        if check_stop(&row, cfg.tol(), cfg.stop()) {
            stopped = true;
            break;
        }
    }

    Ok(Solution {
        image: select(&state, cfg.output()),
        state,
        trace,
        stopped,
    })
}

fn select(state: &PnPState, which: OutputVariable) -> Image {
    match which {
        OutputVariable::V => state.v.clamp01(),
        OutputVariable::X => state.x.clamp01(),
    }
}
