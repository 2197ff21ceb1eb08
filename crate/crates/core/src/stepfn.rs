//! Step functions on `[-1/4, 1/4]` and the piecewise-linear functions their
//! autoconvolutions and autocorrelations produce.
//!
//! A [`StepFunction`] with `n` cells stores the raw heights `a_0..a_{n-1}` on
//! the half-open cells `[-1/4 + j/(2n), -1/4 + (j+1)/(2n))`. The same vector
//! read as polynomial coefficients gives `P(x) = sum a_j x^j`, and the
//! autoconvolution node values are `h * b_k` with `b = coeffs(P^2)`.
//!
//! Nothing is normalized on construction; every norm is computed from the
//! raw values and scales predictably (`f -> lambda f` scales `f*f` by
//! `lambda^2`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Left end of the support of every step function.
pub const SUPPORT_LEFT: f64 = -0.25;

/// `|integral - 1|` below this counts as unit-integral.
pub const UNIT_INTEGRAL_TOL: f64 = 1e-9;

/// Below this `|xi|` the Fourier transform uses the exact `xi = 0` branch.
const XI_ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("a step function needs at least one cell")]
    Empty,
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("coefficient {index} = {value} is negative (pass signed = true to allow this)")]
    Negative { index: usize, value: f64 },
    #[error("coefficient sum is zero, cannot normalize")]
    ZeroSum,
    #[error("the zero function has no c-constant")]
    ZeroFunction,
}

/// Which scaling [`StepFunction::normalize`] targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `h * sum a_j = 1`.
    UnitIntegral,
    /// `sum a_j = sqrt(2n)`.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    coeffs: Vec<f64>,
    signed: bool,
}

impl StepFunction {
    /// A nonnegative step function.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, StepError> {
        Self::with_sign(coeffs, false)
    }

    /// A step function that may take negative values.
    pub fn signed(coeffs: Vec<f64>) -> Result<Self, StepError> {
        Self::with_sign(coeffs, true)
    }

    pub fn with_sign(coeffs: Vec<f64>, signed: bool) -> Result<Self, StepError> {
        if coeffs.is_empty() {
            return Err(StepError::Empty);
        }
        for (index, &value) in coeffs.iter().enumerate() {
            if !value.is_finite() {
                return Err(StepError::NonFinite { index });
            }
            if !signed && value < 0.0 {
                return Err(StepError::Negative { index, value });
            }
        }
        Ok(Self { coeffs, signed })
    }

    /// `n` cells of equal height `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self, StepError> {
        Self::new(vec![value; n])
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// Cell width `h = 1/(2n)`.
    pub fn cell_width(&self) -> f64 {
        0.5 / self.n() as f64
    }

    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn integral(&self) -> f64 {
        self.cell_width() * self.coeff_sum()
    }

    pub fn is_unit_integral(&self) -> bool {
        (self.integral() - 1.0).abs() <= UNIT_INTEGRAL_TOL
    }

    pub fn has_negative(&self) -> bool {
        self.coeffs.iter().any(|&a| a < 0.0)
    }

    /// Left edge of cell `j` (also valid for `j = n`, the right end).
    pub fn cell_edge(&self, j: usize) -> f64 {
        SUPPORT_LEFT + j as f64 * self.cell_width()
    }

    /// Pointwise value, 0 outside `[-1/4, 1/4)`.
    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - SUPPORT_LEFT) / self.cell_width();
        if !(0.0..self.n() as f64).contains(&pos) {
            return 0.0;
        }
        self.coeffs[(pos.floor() as usize).min(self.n() - 1)]
    }

    /// `f * f`: node values `h * b_k` at `x = -1/2 + (k+1) h`, `k = 0..2n-2`.
    pub fn autoconvolve(&self) -> PiecewiseLinear {
        let h = self.cell_width();
        let values = convolve(&self.coeffs, &self.coeffs)
            .into_iter()
            .map(|b| h * b)
            .collect();
        PiecewiseLinear::new(h, -0.5, values)
    }

    /// `f o f`: node values `h * c_k` at `x = k h`, `k = -(n-1)..n-1`.
    pub fn autocorrelate(&self) -> PiecewiseLinear {
        let h = self.cell_width();
        let values = correlate(&self.coeffs, &self.coeffs)
            .into_iter()
            .map(|c| h * c)
            .collect();
        PiecewiseLinear::new(h, -0.5, values)
    }

    /// `sup(f*f)` after rescaling `f` to unit integral, i.e.
    /// `2n * max_k b_k / (sum a_j)^2`. Infinite when the sum vanishes.
    pub fn unit_sup(&self) -> f64 {
        sup_ratio(&self.coeffs)
    }

    /// `||f*f||_2^2 / (||f*f||_inf ||f*f||_1)`, scale invariant and at most 1.
    pub fn c_constant(&self) -> Result<f64, StepError> {
        if self.coeffs.iter().all(|&a| a == 0.0) {
            return Err(StepError::ZeroFunction);
        }
        let g = self.autoconvolve();
        let denom = g.sup_norm() * g.l1();
        if denom == 0.0 {
            return Err(StepError::ZeroFunction);
        }
        Ok(g.l2sq() / denom)
    }

    /// `hat f(xi) = int f(x) exp(-2 pi i x xi) dx`, summed in closed form per cell.
    pub fn fourier_hat(&self, xi: f64) -> Complex64 {
        if xi.abs() < XI_ZERO {
            return Complex64::new(self.integral(), 0.0);
        }
        let w = -2.0 * PI * xi;
        let phase = |x: f64| Complex64::from_polar(1.0, w * x);
        let mut left = phase(self.cell_edge(0));
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &a) in self.coeffs.iter().enumerate() {
            let right = phase(self.cell_edge(j + 1));
            acc += a * (right - left);
            left = right;
        }
        acc / Complex64::new(0.0, w)
    }

    /// Period-`u` coefficient `tilde f(j) = (1/u) hat f(j/u)`.
    pub fn fourier_tilde(&self, j: i64, u: f64) -> Complex64 {
        assert!(u > 0.0, "period must be positive");
        self.fourier_hat(j as f64 / u) / u
    }

    /// `(f(x) + f(-x)) / 2`.
    pub fn symmetrize(&self) -> StepFunction {
        let n = self.n();
        let coeffs = (0..n)
            .map(|j| 0.5 * (self.coeffs[j] + self.coeffs[n - 1 - j]))
            .collect();
        StepFunction {
            coeffs,
            signed: self.signed,
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n / 2).all(|j| (self.coeffs[j] - self.coeffs[n - 1 - j]).abs() <= tol)
    }

    pub fn normalize(&self, convention: Normalization) -> Result<StepFunction, StepError> {
        let sum = self.coeff_sum();
        if sum == 0.0 {
            return Err(StepError::ZeroSum);
        }
        let target = match convention {
            Normalization::UnitIntegral => 1.0 / self.cell_width(),
            Normalization::Polynomial => (2.0 * self.n() as f64).sqrt(),
        };
        Ok(self.scaled(target / sum))
    }

    pub fn scaled(&self, factor: f64) -> StepFunction {
        StepFunction {
            coeffs: self.coeffs.iter().map(|a| a * factor).collect(),
            signed: self.signed,
        }
    }

    /// The same function on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> StepFunction {
        assert!(factor >= 1);
        let coeffs = self
            .coeffs
            .iter()
            .flat_map(|&a| std::iter::repeat_n(a, factor))
            .collect();
        StepFunction {
            coeffs,
            signed: self.signed,
        }
    }
}

/// Continuous piecewise-linear function on a uniform grid.
///
/// Node `k` sits at `left + (k+1) h`; the function is 0 at `left` and at
/// `left + (len+1) h` and vanishes outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub h: f64,
    pub left: f64,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(h: f64, left: f64, values: Vec<f64>) -> Self {
        Self { h, left, values }
    }

    pub fn right(&self) -> f64 {
        self.left + (self.values.len() + 1) as f64 * self.h
    }

    /// `(x, value)` for every node including the two zero endpoints.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = self.values.len();
        (0..len + 2).map(move |k| {
            let v = if k == 0 || k == len + 1 {
                0.0
            } else {
                self.values[k - 1]
            };
            (self.left + k as f64 * self.h, v)
        })
    }

    fn padded(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let first = std::iter::once(0.0);
        let vals = first
            .clone()
            .chain(self.values.iter().copied())
            .chain(std::iter::once(0.0));
        vals.clone().zip(vals.skip(1))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.left) / self.h;
        let len = self.values.len();
        if !(pos > 0.0 && pos < (len + 1) as f64) {
            return 0.0;
        }
        let k = (pos.floor() as usize).min(len);
        let frac = pos - k as f64;
        let at = |i: usize| if i == 0 || i == len + 1 { 0.0 } else { self.values[i - 1] };
        at(k) * (1.0 - frac) + at(k + 1) * frac
    }

    /// Supremum over the real line: `max(0, max_k values[k])`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Exact `int g^2`.
    pub fn l2sq(&self) -> f64 {
        let s: f64 = self
            .padded()
            .map(|(v0, v1)| v0 * v0 + v0 * v1 + v1 * v1)
            .sum();
        s * self.h / 3.0
    }

    /// Exact `int |g|`, splitting sign-changing segments at their root.
    pub fn l1(&self) -> f64 {
        let s: f64 = self
            .padded()
            .map(|(v0, v1)| {
                if v0 * v1 >= 0.0 {
                    0.5 * (v0 + v1).abs()
                } else {
                    0.5 * (v0 * v0 + v1 * v1) / (v0.abs() + v1.abs())
                }
            })
            .sum();
        s * self.h
    }

    pub fn integral(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    pub fn is_even(&self, tol: f64) -> bool {
        let len = self.values.len();
        (self.left + self.right()).abs() <= tol
            && (0..len / 2).all(|k| (self.values[k] - self.values[len - 1 - k]).abs() <= tol)
    }

    /// Exact `int g q` when both share the spacing `h` and their nodes sit on
    /// a common lattice; `None` otherwise.
    pub fn inner_product(&self, other: &PiecewiseLinear) -> Option<f64> {
        let h = self.h;
        if (other.h - h).abs() > 1e-12 * h {
            return None;
        }
        let shift = (other.left - self.left) / h;
        let offset = shift.round();
        if (shift - offset).abs() > 1e-6 {
            return None;
        }
        let offset = offset as i64;
        // Node index i of `self` (0 = left endpoint) is node i - offset of `other`.
        let node = |g: &PiecewiseLinear, i: i64| -> f64 {
            if i >= 1 && (i as usize) <= g.values.len() {
                g.values[i as usize - 1]
            } else {
                0.0
            }
        };
        let len = self.values.len() as i64;
        let sum: f64 = (0..=len)
            .map(|i| {
                let (p0, p1) = (node(self, i), node(self, i + 1));
                let (q0, q1) = (node(other, i - offset), node(other, i + 1 - offset));
                2.0 * p0 * q0 + p0 * q1 + p1 * q0 + 2.0 * p1 * q1
            })
            .sum();
        Some(sum * h / 6.0)
    }
}

/// Full linear convolution, `out[k] = sum_{i+j=k} a_i b_j`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += ai * bj;
        }
    }
    out
}

/// Full cross-correlation, `out[k + len(a) - 1] = sum_j a_j b_{j+k}`.
pub fn correlate(a: &[f64], b: &[f64]) -> Vec<f64> {
    let reversed: Vec<f64> = a.iter().rev().copied().collect();
    convolve(&reversed, b)
}

/// `2n * max_k (a*a)_k / (sum a)^2` for a length-`n` coefficient vector.
pub fn sup_ratio(a: &[f64]) -> f64 {
    let sum: f64 = a.iter().sum();
    if sum == 0.0 {
        return f64::INFINITY;
    }
    let peak = convolve(a, a).into_iter().fold(0.0, f64::max);
    2.0 * a.len() as f64 * peak / (sum * sum)
}
