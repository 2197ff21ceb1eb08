//! Closed-form functions built from power-law pieces `x -> c / |d - 2x|^e`,
//! and their autoconvolutions by singularity-aware quadrature.
//!
//! Endpoint singularities are removed with the substitution
//! `t = endpoint + L s^k`, `k = 1/(1-e)`, which turns `(t - endpoint)^(-e) dt`
//! into a bounded integrand in `s`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numeric::{self, QuadratureError};
use crate::stepfn::{StepError, StepFunction};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 2000;
const MAX_SEGMENTS: usize = 4000;
/// Largest substitution power; caps the map when exponents add up to >= 1.
const MAX_POWER: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("piece interval ({lo}, {hi}) is empty or leaves [-1/4, 1/4]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("exponent {0} is not integrable (need e < 1)")]
    NotIntegrable(f64),
    #[error("singular point {0} lies inside the piece interval")]
    InteriorSingularity(f64),
    #[error("non-finite piece parameter")]
    NonFinite,
    #[error("pieces overlap")]
    Overlap,
    #[error("autoconvolution at x = {x}: {source}")]
    Quadrature {
        x: f64,
        #[source]
        source: QuadratureError,
    },
    #[error("unknown built-in piece set {0:?} (expected f0 or counterexample)")]
    UnknownBuiltin(String),
    #[error("piece line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Step(#[from] StepError),
}

/// `x -> scale / |center - 2x|^exponent` on the open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawPiece {
    lo: f64,
    hi: f64,
    scale: f64,
    center: f64,
    exponent: f64,
}

impl PowerLawPiece {
    pub fn new(lo: f64, hi: f64, scale: f64, center: f64, exponent: f64) -> Result<Self, AnalyticError> {
        if ![lo, hi, scale, center, exponent].iter().all(|v| v.is_finite()) {
            return Err(AnalyticError::NonFinite);
        }
        if !(lo < hi && lo >= -0.25 && hi <= 0.25) {
            return Err(AnalyticError::BadInterval { lo, hi });
        }
        if exponent >= 1.0 {
            return Err(AnalyticError::NotIntegrable(exponent));
        }
        let singular = 0.5 * center;
        if exponent > 0.0 && singular > lo && singular < hi {
            return Err(AnalyticError::InteriorSingularity(singular));
        }
        Ok(Self {
            lo,
            hi,
            scale,
            center,
            exponent,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Where `center - 2x` vanishes.
    pub fn singular_point(&self) -> f64 {
        0.5 * self.center
    }

    /// Formula value with no range check.
    #[inline]
    fn formula(&self, x: f64) -> f64 {
        self.scale * (self.center - 2.0 * x).abs().powf(-self.exponent)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.lo && x < self.hi {
            self.formula(x)
        } else {
            0.0
        }
    }

    /// `-sign(d - 2x) c / (2 (1-e)) |d - 2x|^(1-e)`.
    fn antiderivative(&self, x: f64, sign: f64) -> f64 {
        let p = 1.0 - self.exponent;
        -sign * self.scale / (2.0 * p) * (self.center - 2.0 * x).abs().powf(p)
    }

    /// `int_a^b` of the piece, clipped to its interval.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if a >= b {
            return 0.0;
        }
        let sign = (self.center - (a + b)).signum();
        self.antiderivative(b, sign) - self.antiderivative(a, sign)
    }

    pub fn integral(&self) -> f64 {
        self.integral_over(self.lo, self.hi)
    }
}

/// A function given by disjoint power-law pieces (0 elsewhere).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceSet {
    pieces: Vec<PowerLawPiece>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub sup: f64,
    pub argmax: f64,
}

impl PieceSet {
    pub fn new(mut pieces: Vec<PowerLawPiece>) -> Result<Self, AnalyticError> {
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if pieces.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(AnalyticError::Overlap);
        }
        Ok(Self { pieces })
    }

    /// `f0(x) = 1/sqrt(2x + 1/2)` on `(-1/4, 1/4)`.
    pub fn f0() -> Self {
        Self::new(vec![PowerLawPiece::new(-0.25, 0.25, 1.0, -0.5, 0.5).unwrap()]).unwrap()
    }

    /// The two-piece power law with `sup(f*f) ~ 1.52799`.
    pub fn counterexample() -> Self {
        Self::new(vec![
            PowerLawPiece::new(-0.25, 0.0, 1.392887, 0.00195, 1.0 / 3.0).unwrap(),
            PowerLawPiece::new(0.0, 0.25, 0.338537, 0.500166, 0.65).unwrap(),
        ])
        .unwrap()
    }

    pub fn builtin(name: &str) -> Result<Self, AnalyticError> {
        match name {
            "f0" => Ok(Self::f0()),
            "counterexample" => Ok(Self::counterexample()),
            other => Err(AnalyticError::UnknownBuiltin(other.to_string())),
        }
    }

    /// One `lo hi c d e` tuple per line; `#` comments, commas and parentheses allowed.
    pub fn parse(text: &str) -> Result<Self, AnalyticError> {
        let mut pieces = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let cleaned: String = line
                .chars()
                .map(|c| if matches!(c, ',' | '(' | ')') { ' ' } else { c })
                .collect();
            let fields: Vec<&str> = cleaned.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parse_err = |message: String| AnalyticError::Parse {
                line: idx + 1,
                message,
            };
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 numbers, found {}", fields.len())));
            }
            let mut v = [0.0; 5];
            for (slot, field) in v.iter_mut().zip(&fields) {
                *slot = field
                    .parse()
                    .map_err(|_| parse_err(format!("{field:?} is not a number")))?;
            }
            pieces.push(PowerLawPiece::new(v[0], v[1], v[2], v[3], v[4])?);
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[PowerLawPiece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.eval(x)).sum()
    }

    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(PowerLawPiece::integral).sum()
    }

    /// `f(x) == f(-x)` (to rounding) on a fine probe grid.
    pub fn is_symmetric(&self) -> bool {
        (0..=1000).all(|i| {
            let x = 0.25 * (i as f64 + 0.5) / 1001.0;
            let (l, r) = (self.eval(-x), self.eval(x));
            (l - r).abs() <= 1e-12 * l.abs().max(r.abs()).max(1.0)
        })
    }

    /// `(f*f)(x)` to absolute error `tol`.
    pub fn autoconv_at(&self, x: f64, tol: f64) -> Result<f64, AnalyticError> {
        let mut jobs = Vec::new();
        for a in &self.pieces {
            for b in &self.pieces {
                let lo = a.lo.max(x - b.hi);
                let hi = a.hi.min(x - b.lo);
                if lo < hi {
                    jobs.push((a, b, lo, hi));
                }
            }
        }
        if jobs.is_empty() {
            return Ok(0.0);
        }
        let share = tol / (2 * jobs.len()) as f64;
        let mut total = 0.0;
        for (a, b, lo, hi) in jobs {
            total += product_integral(a, b, x, lo, hi, share)
                .map_err(|source| AnalyticError::Quadrature { x, source })?;
        }
        Ok(total)
    }

    /// Grid scan over `(-1/2, 1/2)` followed by golden-section refinement
    /// around the best node. Grid points are evaluated in parallel.
    pub fn sup_autoconv(&self, grid: usize, tol: f64) -> Result<SupEstimate, AnalyticError> {
        let grid = grid.max(2);
        let step = 1.0 / grid as f64;
        let xs: Vec<f64> = (1..grid).map(|i| -0.5 + i as f64 * step).collect();
        let values: Vec<f64> = xs
            .par_iter()
            .map(|&x| self.autoconv_at(x, tol))
            .collect::<Result<_, _>>()?;
        let (best, &best_val) = values
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
        let lo = xs[best] - step;
        let hi = xs[best] + step;
        let mut failure = None;
        let (x_ref, neg) = numeric::golden_section_min(
            |x| match self.autoconv_at(x, tol) {
                Ok(v) => -v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            lo,
            hi,
            1e-9,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if -neg > best_val {
            Ok(SupEstimate {
                sup: -neg,
                argmax: x_ref,
            })
        } else {
            Ok(SupEstimate {
                sup: best_val,
                argmax: xs[best],
            })
        }
    }

    /// Step function with the exact cell averages of this function.
    pub fn rasterize(&self, n: usize) -> Result<StepFunction, AnalyticError> {
        let h = 0.5 / n as f64;
        let coeffs = (0..n)
            .map(|j| {
                let a = -0.25 + j as f64 * h;
                let b = a + h;
                self.pieces.iter().map(|p| p.integral_over(a, b)).sum::<f64>() / h
            })
            .collect();
        Ok(StepFunction::new(coeffs)?)
    }
}

/// Exponent mass of the factors that are (nearly) singular at `end`.
fn endpoint_exponent(singulars: &[(f64, f64)], end: f64, half: f64) -> f64 {
    singulars
        .iter()
        .filter(|(s, e)| *e > 0.0 && (s - end).abs() <= 0.1 * half)
        .map(|(_, e)| e)
        .sum()
}

fn substitution_power(exponent: f64) -> f64 {
    if exponent <= 0.0 {
        1.0
    } else if exponent >= 1.0 {
        MAX_POWER
    } else {
        (1.0 / (1.0 - exponent)).min(MAX_POWER)
    }
}

/// `int_lo^hi a(t) b(x - t) dt`, split at the midpoint, each half mapped so
/// that its outer endpoint singularity disappears.
fn product_integral(
    a: &PowerLawPiece,
    b: &PowerLawPiece,
    x: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    let mid = 0.5 * (lo + hi);
    let half = mid - lo;
    // Singular locations in t for each factor.
    let singulars = [
        (a.singular_point(), a.exponent),
        (x - b.singular_point(), b.exponent),
    ];
    let integrand = |t: f64| a.formula(t) * b.formula(x - t);

    let mut total = 0.0;
    for (end, dir) in [(lo, 1.0), (hi, -1.0)] {
        let k = substitution_power(endpoint_exponent(&singulars, end, half));
        let mapped = |s: f64| {
            let sk1 = if k == 1.0 { 1.0 } else { s.powf(k - 1.0) };
            let t = end + dir * half * s * sk1;
            integrand(t) * half * k * sk1
        };
        total += numeric::integrate(mapped, 0.0, 1.0, tol, MAX_SEGMENTS)?;
    }
    Ok(total)
}
