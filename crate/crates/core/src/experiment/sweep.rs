use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{PnpError, Result};
use crate::imagecore::Image;
use crate::solver::{analyze_trace, RhoRule};

use super::run::run_on;
use super::spec::{ExperimentSpec, InitSpec};

/// Parameters a sweep can vary. `Seed` varies the random initial point while
/// the measurements stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Tol,
    Rho0,
    Seed,
    Rule,
}

impl FromStr for SweepParam {
    type Err = PnpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tol" => Ok(SweepParam::Tol),
            "rho0" => Ok(SweepParam::Rho0),
            "seed" => Ok(SweepParam::Seed),
            "rule" => Ok(SweepParam::Rule),
            _ => Err(PnpError::invalid(format!(
                "unknown sweep parameter {s:?} (expected tol, rho0, seed or rule)"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Tol => "tol",
            SweepParam::Rho0 => "rho0",
            SweepParam::Seed => "seed",
            SweepParam::Rule => "rule",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub trial: usize,
    pub final_psnr: f64,
    pub iterations: usize,
    /// Fitted residue decay rate; `None` for traces shorter than five rows.
    pub delta_fit: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "param,value,trial,final_psnr,iters,delta_fit";

/// Applies one sweep value to a copy of `base`.
pub fn with_value(base: &ExperimentSpec, param: SweepParam, value: &str) -> Result<ExperimentSpec> {
    let mut spec = base.clone();
    let num = || {
        value
            .parse::<f64>()
            .map_err(|_| PnpError::invalid(format!("bad {param} value {value:?}")))
    };
    match param {
        SweepParam::Tol => spec.config = spec.config.to_builder().tol(num()?).build()?,
        SweepParam::Rho0 => spec.config = spec.config.to_builder().rho0(num()?).build()?,
        SweepParam::Rule => spec.config = spec.config.to_builder().rule(value.parse::<RhoRule>()?).build()?,
        SweepParam::Seed => {
            let s = value
                .parse::<u64>()
                .map_err(|_| PnpError::invalid(format!("bad seed value {value:?}")))?;
            spec.init = InitSpec::Random(s);
        }
    }
    Ok(spec)
}

/// One restoration per `(value, trial)`. Trial `t` draws its measurements
/// with seed `base.seed + t`. Runs are independent and execute in parallel;
/// rows come back in `(value, trial)` order.
pub fn sweep(base: &ExperimentSpec, param: SweepParam, values: &[String], trials: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() || trials == 0 {
        return Err(PnpError::invalid("sweep needs at least one value and one trial"));
    }
    let specs = values
        .iter()
        .map(|v| with_value(base, param, v))
        .collect::<Result<Vec<_>>>()?;
    let truth = base.input.load()?;
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();
    jobs.par_iter()
        .map(|&(i, t)| {
            let mut spec = specs[i].clone();
            spec.seed = base.seed.wrapping_add(t as u64);
            run_row(&spec, truth.clone(), &values[i], t)
        })
        .collect()
}

fn run_row(spec: &ExperimentSpec, truth: Image, value: &str, trial: usize) -> Result<SweepRow> {
    let out = run_on(spec, truth)?;
    let delta_fit = analyze_trace(&out.solution.trace, spec.config.tol())
        .ok()
        .map(|f| f.rate);
    Ok(SweepRow {
        value: value.to_string(),
        trial,
        final_psnr: out.final_psnr,
        iterations: out.iterations(),
        delta_fit,
    })
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let fit = r.delta_fit.map_or(String::new(), |d| format!("{d:.6}"));
        s.push_str(&format!(
            "{param},{},{},{:.6},{},{fit}\n",
            r.value, r.trial, r.final_psnr, r.iterations
        ));
    }
    s
}

/// Mean and sample standard deviation of the final PSNR for one value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub value: String,
    pub mean_psnr: f64,
    pub std_psnr: f64,
    pub trials: usize,
}

/// Groups rows by value, keeping first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SweepSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.value.as_str()) {
            order.push(&r.value);
        }
    }
    order
        .into_iter()
        .map(|v| {
            let p: Vec<f64> = rows.iter().filter(|r| r.value == v).map(|r| r.final_psnr).collect();
            let (mean, std) = mean_std(&p);
            SweepSummary {
                value: v.to_string(),
                mean_psnr: mean,
                std_psnr: std,
                trials: p.len(),
            }
        })
        .collect()
}

/// Mean and sample standard deviation (zero for a single sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_and_grouping() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
        let row = |v: &str, p: f64| SweepRow {
            value: v.into(),
            trial: 0,
            final_psnr: p,
            iterations: 1,
            delta_fit: None,
        };
        let s = summarize(&[row("b", 1.0), row("a", 2.0), row("b", 3.0)]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].value, "b");
        assert_eq!(s[0].mean_psnr, 2.0);
        assert!("gamma".parse::<SweepParam>().is_err());
    }
}
