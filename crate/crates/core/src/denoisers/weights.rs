//! Sparse non-local-means weight matrices and Sinkhorn-Knopp balancing.

use rayon::prelude::*;

use crate::error::{PnpError, Result};
use crate::imagecore::Image;

/// Patch and search geometry plus the Gaussian bandwidth of the weights
/// `W_ij = exp(-||P_i x - P_j x||^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmParams {
    pub patch_radius: usize,
    pub window_radius: usize,
    pub sigma: f64,
}

impl NlmParams {
    pub fn new(patch_radius: usize, window_radius: usize, sigma: f64) -> Result<Self> {
        let p = Self {
            patch_radius,
            window_radius,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(PnpError::invalid(format!(
                "NLM bandwidth must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Square nonnegative matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl WeightMatrix {
    /// Rows given as `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if c >= n {
                    return Err(PnpError::dims(format!("column {c} outside {n}x{n} matrix")));
                }
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(PnpError::invalid("weights must be finite and nonnegative"));
                }
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    /// Row-major dense input; zero entries are dropped.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(PnpError::dims("dense matrix is not n x n"));
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| dense[i * n + j] != 0.0)
                    .map(|j| (j, dense[i * n + j]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] += v;
            }
        }
        d
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (&c, &v) in self.cols.iter().zip(&self.vals) {
            s[c] += v;
        }
        s
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    /// Worst deviation of row and column sums from one.
    pub fn stochastic_residuals(&self) -> (f64, f64) {
        let worst = |s: Vec<f64>| s.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        (worst(self.row_sums()), worst(self.col_sums()))
    }
}

/// Offsets in `-r..=r` that land on distinct residues modulo `len`.
fn unique_offsets(radius: usize, len: usize) -> Vec<isize> {
    let mut seen = vec![false; len];
    let mut out = Vec::new();
    let r = radius as isize;
    for d in std::iter::once(0).chain((1..=r).flat_map(|d| [d, -d])) {
        let m = d.rem_euclid(len as isize) as usize;
        if !seen[m] {
            seen[m] = true;
            out.push(d);
        }
    }
    out
}

/// Symmetric NLM weight matrix restricted to a circular search window.
/// A window radius at least as large as the image gives the full matrix.
pub fn nlm_weights(img: &Image, params: &NlmParams) -> Result<WeightMatrix> {
    params.validate()?;
    let (w, h) = img.dims();
    let wy = unique_offsets(params.window_radius, h);
    let wx = unique_offsets(params.window_radius, w);
    let p = params.patch_radius as isize;
    let denom = 2.0 * params.sigma * params.sigma;
    let at = |r: isize, c: isize| img.get(r.rem_euclid(h as isize) as usize, c.rem_euclid(w as isize) as usize);
    let rows: Vec<Vec<(usize, f64)>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (r0, c0) = ((i / w) as isize, (i % w) as isize);
            let mut row = Vec::with_capacity(wy.len() * wx.len());
            for &dy in &wy {
                for &dx in &wx {
                    let (r1, c1) = (r0 + dy, c0 + dx);
                    let mut d2 = 0.0;
                    for py in -p..=p {
                        for px in -p..=p {
                            let diff = at(r0 + py, c0 + px) - at(r1 + py, c1 + px);
                            d2 += diff * diff;
                        }
                    }
                    let j = r1.rem_euclid(h as isize) as usize * w + c1.rem_euclid(w as isize) as usize;
                    row.push((j, (-d2 / denom).exp()));
                }
            }
            row
        })
        .collect();
    WeightMatrix::from_rows(rows)
}

pub const SINKHORN_TOL: f64 = 1e-8;
pub const SINKHORN_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Balanced {
    pub matrix: WeightMatrix,
    pub sweeps: usize,
}

/// Alternating row/column normalization until every row and column sum is
/// within `tol` of one.
pub fn sinkhorn_knopp(w: &WeightMatrix, tol: f64, max_sweeps: usize) -> Result<Balanced> {
    let n = w.n;
    let (r0, c0) = w.stochastic_residuals();
    if r0 <= tol && c0 <= tol {
        return Ok(Balanced {
            matrix: w.clone(),
            sweeps: 0,
        });
    }
    let mut rs = vec![1.0; n];
    let mut cs = vec![1.0; n];
    let mut colacc = vec![0.0; n];
    let (mut row_res, mut col_res) = (r0, c0);
    for sweep in 1..=max_sweeps {
        for (i, ri) in rs.iter_mut().enumerate() {
            let s: f64 = w.row(i).map(|(j, v)| v * cs[j]).sum();
            if s <= 0.0 {
                return Err(PnpError::invalid(format!("row {i} has no support")));
            }
            *ri = 1.0 / s;
        }
        colacc.iter_mut().for_each(|v| *v = 0.0);
        for (i, &ri) in rs.iter().enumerate() {
            for (j, v) in w.row(i) {
                colacc[j] += ri * v;
            }
        }
        for (j, cj) in cs.iter_mut().enumerate() {
            if colacc[j] <= 0.0 {
                return Err(PnpError::invalid(format!("column {j} has no support")));
            }
            *cj = 1.0 / colacc[j];
        }
        let mut worst_row = 0.0f64;
        for (i, &ri) in rs.iter().enumerate() {
            let s: f64 = w.row(i).map(|(j, v)| ri * v * cs[j]).sum();
            worst_row = worst_row.max((s - 1.0).abs());
        }
        row_res = worst_row;
        if row_res <= tol {
            let matrix = scaled(w, &rs, &cs);
            let (r, c) = matrix.stochastic_residuals();
            if r <= tol && c <= tol {
                return Ok(Balanced { matrix, sweeps: sweep });
            }
            col_res = c;
        }
    }
    Err(PnpError::SinkhornNonConvergence {
        sweeps: max_sweeps,
        row_residual: row_res,
        col_residual: col_res,
    })
}

fn scaled(w: &WeightMatrix, rs: &[f64], cs: &[f64]) -> WeightMatrix {
    let mut out = w.clone();
    for (i, r) in rs.iter().enumerate().take(w.n) {
        for k in w.row_ptr[i]..w.row_ptr[i + 1] {
            out.vals[k] = r * w.vals[k] * cs[w.cols[k]];
        }
    }
    out
}

/// Symmetric balancing `diag(d) W diag(d)` of a symmetric matrix by the
/// Knight-Ruiz inexact Newton iteration. The doubly stochastic scaling of a
/// matrix with total support is unique, so the result matches
/// [`sinkhorn_knopp`] while needing a few dozen matrix products instead of
/// thousands of sweeps on poorly connected weight graphs. `sweeps` counts
/// Newton steps.
pub fn balance_symmetric(w: &WeightMatrix, tol: f64, max_steps: usize) -> Result<Balanced> {
    let n = w.n;
    let (r0, c0) = w.stochastic_residuals();
    if r0 <= tol && c0 <= tol {
        return Ok(Balanced {
            matrix: w.clone(),
            sweeps: 0,
        });
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (delta_lo, delta_hi) = (0.1, 3.0);
    let (g, eta_max) = (0.9, 0.1);
    let mut eta = eta_max;
    let rt = tol * tol * 1e-2;
    let stop_tol = tol * 0.5;

    let mut x = vec![1.0; n];
    let mut v: Vec<f64> = w.apply(&x).iter().zip(&x).map(|(a, b)| a * b).collect();
    let mut rk: Vec<f64> = v.iter().map(|vi| 1.0 - vi).collect();
    let mut rho_km1 = dot(&rk, &rk);
    let mut rout = rho_km1;
    let mut rold = rout;
    let mut steps = 0;
    while steps < max_steps {
        let worst = rk.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if worst <= tol * 0.5 || rout <= rt {
            break;
        }
        steps += 1;
        let mut y = vec![1.0; n];
        let inner_tol = (eta * eta * rout).max(rt);
        let mut z: Vec<f64> = Vec::new();
        let mut p: Vec<f64> = Vec::new();
        let mut rho_km2 = 0.0;
        let mut k = 0;
        while rho_km1 > inner_tol && k < 4 * n.max(10) {
            k += 1;
            if k == 1 {
                z = rk.iter().zip(&v).map(|(r, vi)| r / vi).collect();
                p = z.clone();
                rho_km1 = dot(&rk, &z);
            } else {
                let beta = rho_km1 / rho_km2;
                p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
            }
            let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a * b).collect();
            let axp = w.apply(&xp);
            let wv: Vec<f64> = (0..n).map(|i| x[i] * axp[i] + v[i] * p[i]).collect();
            let alpha = rho_km1 / dot(&p, &wv);
            let ap: Vec<f64> = p.iter().map(|pi| alpha * pi).collect();
            let ynew: Vec<f64> = y.iter().zip(&ap).map(|(a, b)| a + b).collect();
            if ynew.iter().any(|&t| t <= delta_lo) {
                let gamma = (0..n)
                    .filter(|&i| ap[i] < 0.0)
                    .map(|i| (delta_lo - y[i]) / ap[i])
                    .fold(f64::INFINITY, f64::min);
                y.iter_mut().zip(&ap).for_each(|(yi, a)| *yi += gamma * a);
                break;
            }
            if ynew.iter().any(|&t| t >= delta_hi) {
                let gamma = (0..n)
                    .filter(|&i| ynew[i] > delta_hi)
                    .map(|i| (delta_hi - y[i]) / ap[i])
                    .fold(f64::INFINITY, f64::min);
                y.iter_mut().zip(&ap).for_each(|(yi, a)| *yi += gamma * a);
                break;
            }
            y = ynew;
            rk.iter_mut().zip(&wv).for_each(|(r, wi)| *r -= alpha * wi);
            rho_km2 = rho_km1;
            z = rk.iter().zip(&v).map(|(r, vi)| r / vi).collect();
            rho_km1 = dot(&rk, &z);
        }
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi *= yi);
        v = w.apply(&x).iter().zip(&x).map(|(a, b)| a * b).collect();
        rk = v.iter().map(|vi| 1.0 - vi).collect();
        rho_km1 = dot(&rk, &rk);
        rout = rho_km1;
        if !rout.is_finite() {
            break;
        }
        let rat = rout / rold;
        rold = rout;
        let eta_o = eta;
        eta = g * rat;
        if g * eta_o * eta_o > 0.1 {
            eta = eta.max(g * eta_o * eta_o);
        }
        eta = eta.min(eta_max).max(stop_tol / rout.sqrt());
    }
    let matrix = scaled(w, &x, &x);
    let (r, c) = matrix.stochastic_residuals();
    if r <= tol && c <= tol {
        Ok(Balanced { matrix, sweeps: steps })
    } else {
        Err(PnpError::SinkhornNonConvergence {
            sweeps: steps,
            row_residual: r,
            col_residual: c,
        })
    }
}

/// Balances NLM weights: the symmetric Newton solver first, alternating
/// sweeps if it fails.
pub fn balance(w: &WeightMatrix) -> Result<Balanced> {
    if w.is_symmetric(1e-14) {
        for tol in [SINKHORN_TOL * 1e-4, SINKHORN_TOL] {
            if let Ok(b) = balance_symmetric(w, tol, 200) {
                return Ok(b);
            }
        }
    }
    sinkhorn_knopp(w, SINKHORN_TOL, SINKHORN_MAX_SWEEPS)
}

/// Sinkhorn-balanced NLM: `D(x) = W~_x x`, weights built from `img` itself.
pub fn denoise_nlm(params: &NlmParams, img: &Image) -> Result<Image> {
    let w = nlm_weights(img, params)?;
    let b = balance(&w)?;
    Image::new(img.width(), img.height(), b.matrix.apply(img.data()))
}
