//! Cubic least squares with adjusted R².
//!
//! The predictor is rescaled to `[-1, 1]` and the augmented design
//! `[1, t, t², t³ | y]` is reduced block by block with Householder QR, keeping
//! only the small triangular factor between blocks. The last diagonal entry
//! of that factor is the residual norm.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BLOCK_ROWS: usize = 4096;
pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("degenerate regression input: {0}")]
    DegenerateInput(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Coefficients of `1, x, x², x³` in the original predictor units.
    /// Entries above `effective_degree` are zero.
    pub coefficients: [f64; 4],
    pub n: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub effective_degree: usize,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

fn distinct_up_to(xs: &[f64], limit: usize) -> usize {
    let mut seen: Vec<f64> = Vec::with_capacity(limit);
    for &x in xs {
        if !seen.contains(&x) {
            seen.push(x);
            if seen.len() >= limit {
                break;
            }
        }
    }
    seen.len()
}

/// Ordinary least squares of `ys` on `{1, x, x², x³}`.
///
/// With fewer than four distinct predictor values the degree drops to
/// `distinct - 1`, recorded in `effective_degree`.
pub fn cubic_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit, RegressionError> {
    let degenerate = |m: String| Err(RegressionError::DegenerateInput(m));
    if xs.len() != ys.len() {
        return degenerate(format!("{} predictors but {} responses", xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 5 {
        return degenerate(format!("need at least 5 observations, got {n}"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return degenerate("non-finite observation".into());
    }
    let distinct = distinct_up_to(xs, MAX_DEGREE + 1);
    if distinct < 2 {
        return degenerate("all predictor values are identical".into());
    }
    let degree = distinct - 1;

    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if sst == 0.0 {
        return degenerate("response has zero variance".into());
    }

    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let cols = degree + 2;
    let mut r = DMatrix::<f64>::zeros(0, cols);
    for (xb, yb) in xs.chunks(BLOCK_ROWS).zip(ys.chunks(BLOCK_ROWS)) {
        let rows = r.nrows() + xb.len();
        let mut block = DMatrix::<f64>::zeros(rows, cols);
        block.view_mut((0, 0), (r.nrows(), cols)).copy_from(&r);
        for (k, (&x, &y)) in xb.iter().zip(yb).enumerate() {
            let row = r.nrows() + k;
            let t = (x - center) / half;
            let mut p = 1.0;
            for c in 0..=degree {
                block[(row, c)] = p;
                p *= t;
            }
            block[(row, cols - 1)] = y - mean_y;
        }
        let keep = rows.min(cols);
        r = block.qr().r().rows(0, keep).into_owned();
    }

    let m = degree + 1;
    let tri = r.view((0, 0), (m, m)).into_owned();
    let rhs = r.view((0, cols - 1), (m, 1)).into_owned();
    let Some(beta) = tri.solve_upper_triangular(&rhs) else {
        return degenerate("singular design matrix".into());
    };
    let ssr = if r.nrows() == cols { r[(cols - 1, cols - 1)].powi(2) } else { 0.0 };

    // Back to raw units: t = (x - center) / half, intercept restores the mean.
    let mut coefficients = [0.0; 4];
    let scale = half.recip();
    for k in 0..=degree {
        let b = beta[k] * scale.powi(k as i32);
        for (i, c) in coefficients.iter_mut().enumerate().take(k + 1) {
            *c += b * binomial(k, i) * (-center).powi((k - i) as i32);
        }
    }
    coefficients[0] += mean_y;

    let r2 = (1.0 - ssr / sst).min(1.0);
    let dof = n as f64 - degree as f64 - 1.0;
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof;
    Ok(RegressionFit {
        coefficients,
        n,
        r2,
        adj_r2,
        effective_degree: degree,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
