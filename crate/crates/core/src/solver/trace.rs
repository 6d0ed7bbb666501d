use std::fmt::Write as _;
use std::path::Path;

use crate::error::{PnpError, Result};

use super::StopCriterion;

pub const TRACE_CSV_HEADER: &str = "k,rho,sigma,delta,eps1,eps2,eps3,psnr";

/// One solver iteration. `rho` and `sigma` are the values used to produce
/// this iterate; `delta` compares it with the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub rho: f64,
    pub sigma: f64,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub psnr: Option<f64>,
}

impl TraceRow {
    pub fn max_eps(&self) -> f64 {
        self.eps1.max(self.eps2).max(self.eps3)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = write!(
                s,
                "{},{},{},{},{},{},{},",
                r.k, r.rho, r.sigma, r.delta, r.eps1, r.eps2, r.eps3
            );
            if let Some(p) = r.psnr {
                let _ = write!(s, "{p}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|source| PnpError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |reason: String| PnpError::Format {
            path: "<trace csv>".into(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == TRACE_CSV_HEADER => {}
            other => return Err(bad(format!("unexpected header {other:?}"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad(format!("line {}: expected 8 fields", i + 2)));
            }
            let num = |j: usize| -> Result<f64> {
                f[j].trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number {:?}", i + 2, f[j])))
            };
            let k = f[0].trim().parse().map_err(|_| bad(format!("line {}: bad k", i + 2)))?;
            let psnr = if f[7].trim().is_empty() { None } else { Some(num(7)?) };
            rows.push(TraceRow {
                k,
                rho: num(1)?,
                sigma: num(2)?,
                delta: num(3)?,
                eps1: num(4)?,
                eps2: num(5)?,
                eps3: num(6)?,
                psnr,
            });
        }
        Ok(SolverTrace { rows })
    }
}

/// Whether a trace row satisfies the stopping rule (inclusive).
pub fn check_stop(row: &TraceRow, tol: f64, criterion: StopCriterion) -> bool {
    match criterion {
        StopCriterion::Residue => row.delta <= tol,
        StopCriterion::MaxComponent => row.max_eps() <= tol / 3.0,
    }
}

/// Geometric-decay fit of a residue trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceFit {
    /// Fitted per-iteration decay rate.
    pub rate: f64,
    /// Envelope constant: `delta_k ~ constant * rate^k`.
    pub constant: f64,
    pub converged: bool,
}

/// Least-squares fit of `ln delta_k` against `k` over the second half of the
/// trace. Zero residues carry no slope information and are skipped.
pub fn analyze_trace(trace: &SolverTrace, tol: f64) -> Result<TraceFit> {
    if trace.len() < 5 {
        return Err(PnpError::invalid(format!(
            "trace too short for a decay fit ({} rows, need 5)",
            trace.len()
        )));
    }
    let tail = &trace.rows[trace.len() / 2..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.delta > 0.0)
        .map(|r| (r.k as f64, r.delta.ln()))
        .collect();
    let final_delta = trace.rows.last().map_or(f64::INFINITY, |r| r.delta);
    let (rate, constant) = if pts.len() < 2 {
        // residue hit exactly zero
        (0.0, 0.0)
    } else {
        let n = pts.len() as f64;
        let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = ml - slope * mk;
        (slope.exp(), intercept.exp())
    };
    Ok(TraceFit {
        rate,
        constant,
        converged: rate < 1.0 && final_delta <= tol,
    })
}

/// `delta_{k+1} * sqrt(rho_k)` per row: bounded on runs where the residue
/// decays like `1/sqrt(rho)`.
pub fn sqrt_rho_envelope(trace: &SolverTrace) -> Vec<f64> {
    trace.rows.iter().map(|r| r.delta * r.rho.sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, delta: f64) -> TraceRow {
        TraceRow {
            k,
            rho: 1.0,
            sigma: 1.0,
            delta,
            eps1: delta,
            eps2: 0.0,
            eps3: 0.0,
            psnr: None,
        }
    }

    fn trace_of(deltas: impl IntoIterator<Item = f64>) -> SolverTrace {
        SolverTrace {
            rows: deltas.into_iter().enumerate().map(|(i, d)| row(i + 1, d)).collect(),
        }
    }

    #[test]
    fn stop_rules() {
        let mut r = row(1, 9e-4);
        assert!(check_stop(&r, 1e-3, StopCriterion::Residue));
        r.delta = 1e-3;
        assert!(check_stop(&r, 1e-3, StopCriterion::Residue));
        r.delta = 1.1e-3;
        assert!(!check_stop(&r, 1e-3, StopCriterion::Residue));
        let r = TraceRow {
            eps1: 3e-4,
            eps2: 3e-4,
            eps3: 4e-4,
            delta: 1e-3,
            ..row(1, 0.0)
        };
        assert!(!check_stop(&r, 1e-3, StopCriterion::MaxComponent));
    }

    #[test]
    fn fit_exact_geometric() {
        let t = trace_of((1..=30).map(|k| 0.5f64.powi(k)));
        let fit = analyze_trace(&t, 1e-3).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-6);
        assert!((fit.constant - 1.0).abs() < 1e-6);
        assert!(fit.converged);
    }

    #[test]
    fn fit_constant_is_not_converged() {
        let t = trace_of(std::iter::repeat_n(0.3, 10));
        let fit = analyze_trace(&t, 1e-3).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-12);
        assert!(!fit.converged);
    }

    #[test]
    fn fit_needs_five_rows() {
        assert!(analyze_trace(&trace_of([1.0, 0.5, 0.2, 0.1]), 1e-3).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut t = trace_of([0.5, 0.25, 1e-7]);
        t.rows[1].psnr = Some(23.5);
        t.rows[2].rho = 1.3e-5;
        let csv = t.to_csv();
        assert!(csv.starts_with("k,rho,sigma,delta,eps1,eps2,eps3,psnr\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        assert_eq!(SolverTrace::from_csv(&csv).unwrap(), t);
        assert!(SolverTrace::from_csv("k,rho\n1,2").is_err());
    }
}
