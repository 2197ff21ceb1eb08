//! Lower bound from minimizing `2 ||f * beta_delta||_2^2` over nonnegative
//! symmetric unit-integral step functions on `[-1/4, 1/4]`.
//!
//! For even `f`, `int (f*f + f o f) K = 2 ||f * beta_delta||^2`, so the
//! minimum `Q` of the right side gives `s + 1 + sqrt(s-1) sqrt(||K||^2-1) >= Q`.

use serde::Serialize;
use thiserror::Error;

use super::{kernel::beta_cells, smallest_s, K2SQ_CONSTANT};
use crate::stepfn::correlate;

pub const MIN_CELLS: usize = 50;
const REL_TOL: f64 = 1e-10;
const CHECK_EVERY: usize = 100;
const MAX_ITER: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadraticError {
    #[error("need at least {MIN_CELLS} cells, got {0}")]
    TooCoarse(usize),
    #[error("delta = {0} must lie in (0, 1/4]")]
    BadDelta(f64),
    #[error("projected gradient did not converge in {iterations} iterations (value {value})")]
    NotConverged { iterations: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticBound {
    pub delta: f64,
    pub cells: usize,
    /// `min 2 ||f * beta_delta||^2`.
    pub q: f64,
    pub bound: f64,
    pub iterations: usize,
    /// Minimizing step heights (unit integral).
    pub minimizer: Vec<f64>,
}

/// First column of the symmetric Toeplitz matrix `H` with
/// `a^T H a = 2 ||f_a * w||^2` for step heights `a` and `w` of width `h`.
fn hessian_column(w: &[f64], h: f64, m: usize) -> Vec<f64> {
    let r = correlate(w, w);
    let centre = w.len() as i64 - 1;
    let rk = |k: i64| -> f64 {
        let k = k.abs();
        if k <= centre {
            r[(centre + k) as usize]
        } else {
            0.0
        }
    };
    let scale = 2.0 * h * h * h / 3.0;
    (0..m as i64)
        .map(|k| scale * (2.0 * rk(k) + 0.5 * (rk(k + 1) + rk(k - 1))))
        .collect()
}

fn toeplitz_apply(col: &[f64], x: &[f64], out: &mut [f64]) {
    let m = x.len();
    for i in 0..m {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            s += col[i.abs_diff(j)] * xj;
        }
        out[i] = s;
    }
}

/// Euclidean projection onto `{x >= 0, sum x = total}`.
fn project_simplex(y: &mut [f64], total: f64) {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        let t = (acc - total) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

fn symmetrize(x: &mut [f64]) {
    let m = x.len();
    for i in 0..m / 2 {
        let avg = 0.5 * (x[i] + x[m - 1 - i]);
        x[i] = avg;
        x[m - 1 - i] = avg;
    }
}

fn quad_form(col: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
    toeplitz_apply(col, x, scratch);
    x.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum()
}

/// Accelerated projected gradient (FISTA) on `a^T H a` over the scaled simplex,
/// then the basic inequality with `||K||^2 <= 0.5747/delta`.
pub fn quadratic_min_bound(delta: f64, m: usize) -> Result<QuadraticBound, QuadraticError> {
    if m < MIN_CELLS {
        return Err(QuadraticError::TooCoarse(m));
    }
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(QuadraticError::BadDelta(delta));
    }
    let h = 1.0 / (2 * m) as f64;
    let (_, w) = beta_cells(delta, h);
    let col = hessian_column(&w, h, m);
    // Gershgorin bound on the largest eigenvalue of 2H (the gradient's Lipschitz constant).
    let lipschitz = 2.0 * (col[0].abs() + 2.0 * col[1..].iter().map(|c| c.abs()).sum::<f64>());
    let total = 1.0 / h;

    let mut x = vec![total / m as f64; m];
    let mut y = x.clone();
    let mut grad = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut momentum = 1.0_f64;
    let mut prev = quad_form(&col, &x, &mut scratch);
    for it in 1..=MAX_ITER {
        toeplitz_apply(&col, &y, &mut grad);
        let mut next: Vec<f64> = y.iter().zip(&grad).map(|(v, g)| v - 2.0 * g / lipschitz).collect();
        project_simplex(&mut next, total);
        symmetrize(&mut next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / t_next;
        for i in 0..m {
            y[i] = next[i] + beta * (next[i] - x[i]);
        }
        x = next;
        momentum = t_next;
        if it % CHECK_EVERY == 0 {
            let value = quad_form(&col, &x, &mut scratch);
            if (prev - value).abs() < REL_TOL * value {
                let bound = smallest_s(value, K2SQ_CONSTANT / delta - 1.0);
                return Ok(QuadraticBound {
                    delta,
                    cells: m,
                    q: value,
                    bound,
                    iterations: it,
                    minimizer: x,
                });
            }
            // Restart momentum whenever the objective goes up.
            if value > prev {
                momentum = 1.0;
                y.copy_from_slice(&x);
            }
            prev = value;
        }
    }
    Err(QuadraticError::NotConverged {
        iterations: MAX_ITER,
        value: prev,
    })
}
