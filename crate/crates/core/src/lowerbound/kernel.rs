//! Bessel `J0` and the arcsine-autocorrelation kernel
//! `K(x) = (1/delta) (beta o beta)(x/delta)`, `beta(x) = (2/pi) / sqrt(1 - 4x^2)`.
//!
//! The period-`u` Fourier coefficients of `K` are `(1/u) J0(pi delta j / u)^2`
//! and its period-1 coefficients are `J0(pi delta xi)^2`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::stepfn::PiecewiseLinear;

/// Bessel function of the first kind, order 0, to about 1e-15 absolute.
///
/// Power series up to `|x| = 8`, the periodic trapezoidal rule on
/// `(1/pi) int_0^pi cos(x sin t) dt` up to 25 (exponentially convergent, so a
/// few dozen nodes reach machine precision), Hankel's asymptotic expansion
/// beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 8.0 {
        j0_series(ax)
    } else if ax < 25.0 {
        j0_trapezoid(ax)
    } else {
        j0_hankel(ax)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn j0_trapezoid(x: f64) -> f64 {
    // Error ~ J_{2N}(x), negligible once 2N is well past x.
    let nodes = x.ceil() as usize + 32;
    let step = PI / nodes as f64;
    let sum: f64 = (0..nodes).map(|k| (x * (k as f64 * step).sin()).cos()).sum();
    sum / nodes as f64
}

fn j0_hankel(x: f64) -> f64 {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let eight_x = 8.0 * x;
    for m in 1..60 {
        let odd = (2 * m - 1) as f64;
        let next = term * (-(odd * odd)) / (m as f64 * eight_x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        // P collects even orders with alternating sign, Q the odd ones.
        match m % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `K~(j) = (1/u) J0(pi delta j / u)^2`.
pub fn kernel_tilde(delta: f64, u: f64, j: i64) -> f64 {
    let b = bessel_j0(PI * delta * j as f64 / u);
    b * b / u
}

/// `K^(1) = J0(pi delta)^2`.
pub fn kernel_hat_one(delta: f64) -> f64 {
    let b = bessel_j0(PI * delta);
    b * b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelNorm {
    /// Truncated Parseval sum.
    pub value: f64,
    /// Upper bound on the omitted tail, so the true norm lies in
    /// `[value, value + tail_bound]`.
    pub tail_bound: f64,
}

impl KernelNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `||K||_2^2 = (1/u) sum_j J0(pi delta j/u)^4` by Parseval on period `u`,
/// truncated at `|j| <= tail_terms`. The tail uses `J0(x)^2 <= 2/(pi x)`.
pub fn kernel_l2sq(delta: f64, u: f64, tail_terms: usize) -> KernelNorm {
    assert!(tail_terms >= 1000, "use at least 1000 terms");
    let c = PI * delta / u;
    let mut sum = 0.0;
    // Summed from the small tail terms upward.
    for j in (1..=tail_terms).rev() {
        let b = bessel_j0(c * j as f64);
        sum += b.powi(4);
    }
    let value = (1.0 + 2.0 * sum) / u;
    let tail = 2.0 * 4.0 / (PI * PI * c * c * tail_terms as f64) / u;
    KernelNorm {
        value,
        tail_bound: tail,
    }
}

/// `beta_delta(x) = (1/delta) beta(x/delta)` averaged over cells of width `h`
/// placed symmetrically about 0. Returns `(left edge, heights)`.
pub fn beta_cells(delta: f64, h: f64) -> (f64, Vec<f64>) {
    let count = (delta / h - 1e-9).ceil().max(1.0) as usize;
    let left = -0.5 * count as f64 * h;
    let cdf = |x: f64| (2.0 * x / delta).clamp(-1.0, 1.0).asin() / PI;
    let heights = (0..count)
        .map(|i| {
            let a = left + i as f64 * h;
            (cdf(a + h) - cdf(a)) / h
        })
        .collect();
    (left, heights)
}

/// The kernel built from [`beta_cells`]: `K_h = w o w`, piecewise linear with
/// nodes on multiples of `h`. Nonnegative, even, unit integral.
pub fn kernel_step(delta: f64, h: f64) -> PiecewiseLinear {
    let (_, w) = beta_cells(delta, h);
    let corr = crate::stepfn::correlate(&w, &w);
    PiecewiseLinear::new(h, -(w.len() as f64) * h, corr.into_iter().map(|c| c * h).collect())
}
