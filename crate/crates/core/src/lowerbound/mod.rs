//! Fourier-analytic lower bounds for `sup(f*f)`.
//!
//! With `u = 1/2 + delta`, the kernel `K` of [`kernel`] and an even cosine
//! polynomial `G(x) = sum_j a_j cos(2 pi j x / u)` that stays positive on
//! `[-1/4, 1/4]`, every nonnegative unit-integral `f` on `[-1/4, 1/4]` obeys
//!
//! ```text
//! s + 1 + sqrt(s - 1) sqrt(||K||^2 - 1) >= 2/u + a,
//! a = (4/u) (min G)^2 / sum_j (a_j^2 / J0(pi delta j/u)^2)
//! ```
//!
//! for `s = sup(f*f)`. Pulling the first Fourier coefficient `z1 = |f^(1)|`
//! out of the Parseval sum sharpens this to a bound `l(z1)`, and because
//! `z1^2 <= (M/pi) sin(pi/M)` whenever `sup(f*f) <= M`, small values of
//! `sup(f*f)` are ruled out by a contradiction argument ([`certify`]).

pub mod kernel;
pub mod quadratic;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::numeric;

pub use kernel::{bessel_j0, kernel_l2sq, kernel_tilde, KernelNorm};
pub use quadratic::{quadratic_min_bound, QuadraticBound};

/// Numerator of the `||K||_2^2 < 0.5747 / delta` estimate.
pub const K2SQ_CONSTANT: f64 = 0.5747;
pub const FORBIDDEN_TOL: f64 = 1e-7;
pub const CERTIFY_TOL: f64 = 1e-5;
const MIN_BESSEL_DIVISOR: f64 = 1e-9;
const G_REFINE_TOL: f64 = 1e-10;
const FORBIDDEN_SCAN: usize = 1000;
const Z_SCAN: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("delta = {0} must lie in (0, 1/4]")]
    BadDelta(f64),
    #[error("G needs at least one coefficient")]
    EmptyG,
    #[error("J0(pi delta j/u) = {value:e} is too close to zero for coefficient j = {j}")]
    NearZeroBessel { j: usize, value: f64 },
    #[error("||K||_2^2 bound {0} must exceed 1")]
    KernelBound(f64),
    #[error("||K||^2 - 1 - 2 k1^2 = {0} is not positive")]
    ModifiedDomain(f64),
    #[error("M = {0} < 1: no unit-integral function on a unit interval is bounded by M")]
    BadMaximum(f64),
    #[error("G is not positive on [-1/4, 1/4] (min {0})")]
    NonPositiveG(f64),
    #[error("s0 = {0} must be at least 1")]
    BadThreshold(f64),
}

/// Everything the certificate depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateParams {
    pub delta: f64,
    pub u: f64,
    /// Upper bound used for `||K||_2^2`.
    pub k2sq_bound: f64,
    /// `a_1..a_N` of `G`.
    pub g_coeffs: Vec<f64>,
    /// `K^(1) = J0(pi delta)^2`.
    pub k1: f64,
}

impl CertificateParams {
    /// Standard parameters: `u = 1/2 + delta`, `||K||^2 <= 0.5747/delta`.
    pub fn new(delta: f64, g_coeffs: Vec<f64>) -> Result<Self, CertError> {
        if !(delta > 0.0 && delta <= 0.25) {
            return Err(CertError::BadDelta(delta));
        }
        if g_coeffs.is_empty() {
            return Err(CertError::EmptyG);
        }
        Ok(Self {
            delta,
            u: 0.5 + delta,
            k2sq_bound: K2SQ_CONSTANT / delta,
            g_coeffs,
            k1: kernel::kernel_hat_one(delta),
        })
    }

    /// The bundled `delta = 0.138`, 119-coefficient certificate.
    pub fn bundled() -> Self {
        let g = crate::assets::coefficients(crate::assets::G_DELTA0138_N119);
        Self::new(0.138, g).expect("bundled parameters are valid")
    }

    /// Swap the `0.5747/delta` constant for the numerically summed norm
    /// (plus its tail bound).
    pub fn with_sharp_kernel_norm(mut self) -> Self {
        self.k2sq_bound = kernel_l2sq(self.delta, self.u, 100_000).upper();
        self
    }

    pub fn kernel_tilde(&self, j: i64) -> f64 {
        kernel_tilde(self.delta, self.u, j)
    }

    pub fn kernel_l2sq_numeric(&self, tail_terms: usize) -> KernelNorm {
        kernel_l2sq(self.delta, self.u, tail_terms)
    }

    pub fn eval_g(&self, x: f64) -> f64 {
        let w = 2.0 * PI * x / self.u;
        self.g_coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * (w * (i + 1) as f64).cos())
            .sum()
    }

    /// `min_{0 <= x <= 1/4} G(x)` and where it is attained. `G` is even, so
    /// this is also its minimum on `[-1/4, 1/4]`.
    pub fn min_g(&self) -> (f64, f64) {
        let points = (20 * self.g_coeffs.len()).max(1000);
        let step = 0.25 / points as f64;
        let values: Vec<f64> = (0..=points).map(|i| self.eval_g(i as f64 * step)).collect();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=points {
            let left = if i > 0 { values[i - 1] } else { f64::INFINITY };
            let right = if i < points { values[i + 1] } else { f64::INFINITY };
            if values[i] > left || values[i] > right {
                continue;
            }
            let lo = (i.max(1) - 1) as f64 * step;
            let hi = ((i + 1).min(points)) as f64 * step;
            let (x, v) = numeric::golden_section_min(|x| self.eval_g(x), lo, hi, G_REFINE_TOL);
            let (x, v) = if v <= values[i] { (x, v) } else { (i as f64 * step, values[i]) };
            if v < best.0 {
                best = (v, x);
            }
        }
        best
    }

    /// `sum_j a_j^2 / J0(pi delta j/u)^2`.
    fn weighted_energy(&self) -> Result<f64, CertError> {
        let mut sum = 0.0;
        for (i, &a) in self.g_coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let j = i + 1;
            let b = bessel_j0(PI * self.delta * j as f64 / self.u);
            if b.abs() <= MIN_BESSEL_DIVISOR {
                return Err(CertError::NearZeroBessel { j, value: b });
            }
            sum += a * a / (b * b);
        }
        Ok(sum)
    }

    /// The gain `a = (4/u) (min G)^2 / sum_j (a_j^2 / J0(pi delta j/u)^2)`.
    pub fn gain(&self) -> Result<f64, CertError> {
        let (min_g, _) = self.min_g();
        self.gain_with_min(min_g)
    }

    fn gain_with_min(&self, min_g: f64) -> Result<f64, CertError> {
        let energy = self.weighted_energy()?;
        Ok(4.0 / self.u * min_g * min_g / energy)
    }

    /// Smallest `s >= 1` with `s + 1 + sqrt(s-1) sqrt(||K||^2 - 1) >= 2/u + gain`.
    pub fn basic_bound(&self, gain: f64) -> Result<f64, CertError> {
        if self.k2sq_bound <= 1.0 {
            return Err(CertError::KernelBound(self.k2sq_bound));
        }
        Ok(smallest_s(2.0 / self.u + gain, self.k2sq_bound - 1.0))
    }

    /// `l(z1)`: smallest `s >= 1 + 2 z1^4` with
    /// `s + 1 + 2 z1^2 k1 + sqrt(s - 1 - 2 z1^4) sqrt(||K||^2 - 1 - 2 k1^2) >= 2/u + gain`.
    pub fn modified_bound_l(&self, gain: f64, z1: f64) -> Result<f64, CertError> {
        let slack = self.k2sq_bound - 1.0 - 2.0 * self.k1 * self.k1;
        if slack <= 0.0 {
            return Err(CertError::ModifiedDomain(slack));
        }
        let z2 = z1 * z1;
        let floor = 2.0 * z2 * z2;
        // With s = 1 + floor + t^2: t^2 + C t + (2 + floor + 2 z1^2 k1 - rhs) >= 0.
        let rhs = 2.0 / self.u + gain;
        let t = positive_root(slack.sqrt(), 2.0 + floor + 2.0 * z2 * self.k1 - rhs);
        Ok(1.0 + floor + t * t)
    }

    /// `{x in [0, 1] : l(x) < s0}` as a list of intervals, endpoints located by
    /// bisection to [`FORBIDDEN_TOL`].
    pub fn forbidden_set(&self, gain: f64, s0: f64) -> Result<Vec<(f64, f64)>, CertError> {
        if s0 < 1.0 {
            return Err(CertError::BadThreshold(s0));
        }
        let below = |z: f64| -> Result<f64, CertError> { Ok(self.modified_bound_l(gain, z)? - s0) };
        let step = 1.0 / FORBIDDEN_SCAN as f64;
        let mut intervals = Vec::new();
        let mut open: Option<f64> = None;
        let mut prev = below(0.0)?;
        if prev < 0.0 {
            open = Some(0.0);
        }
        for i in 1..=FORBIDDEN_SCAN {
            let z = i as f64 * step;
            let cur = below(z)?;
            let crossing = || {
                numeric::bisect(
                    |x| self.modified_bound_l(gain, x).map(|l| l - s0).unwrap_or(f64::NAN),
                    z - step,
                    z,
                    FORBIDDEN_TOL,
                )
            };
            if prev >= 0.0 && cur < 0.0 {
                open = Some(crossing());
            } else if prev < 0.0 && cur >= 0.0 {
                intervals.push((open.take().unwrap_or(0.0), crossing()));
            }
            prev = cur;
        }
        if let Some(start) = open {
            intervals.push((start, 1.0));
        }
        Ok(intervals)
    }
}

/// `|h^(1)| <= (M/pi) sin(pi/M)` for nonnegative unit-integral `h` on
/// `[-1/2, 1/2]` bounded by `M`.
pub fn lemma_h_bound(m: f64) -> Result<f64, CertError> {
    if !(m >= 1.0) {
        return Err(CertError::BadMaximum(m));
    }
    Ok((m / PI * (PI / m).sin()).max(0.0))
}

/// Positive root of `t^2 + b t + c = 0` (0 when `c >= 0`), without cancellation.
fn positive_root(b: f64, c: f64) -> f64 {
    if c >= 0.0 {
        return 0.0;
    }
    -2.0 * c / (b + (b * b - 4.0 * c).sqrt())
}

/// Smallest `s >= 1` with `s + 1 + sqrt(s - 1) sqrt(norm_minus_one) >= rhs`.
pub(crate) fn smallest_s(rhs: f64, norm_minus_one: f64) -> f64 {
    let t = positive_root(norm_minus_one.sqrt(), 2.0 - rhs);
    1.0 + t * t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub quantity: String,
    pub value: f64,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub min_g: f64,
    pub argmin_g: f64,
    pub gain: f64,
    pub basic_bound: f64,
    pub z1_threshold: f64,
    pub l_at_threshold: f64,
    pub forbidden_interval: Option<(f64, f64)>,
    pub certified_bound: f64,
    pub audit: Vec<AuditEntry>,
    pub diagnostic: Option<String>,
}

impl BoundReport {
    fn push(&mut self, quantity: &str, value: f64, formula: &str) {
        self.audit.push(AuditEntry {
            quantity: quantity.to_string(),
            value,
            formula: formula.to_string(),
        });
    }
}

/// Runs the whole chain: `min G`, gain, the basic bound, then the largest `s0`
/// for which `l >= s0` on `[0, sqrt((s0/pi) sin(pi/s0))]`.
pub fn certify(params: &CertificateParams) -> Result<BoundReport, CertError> {
    let (min_g, argmin_g) = params.min_g();
    if min_g <= 0.0 {
        return Err(CertError::NonPositiveG(min_g));
    }
    let gain = params.gain_with_min(min_g)?;
    let mut report = certify_with_gain(params, gain)?;
    report.min_g = min_g;
    report.argmin_g = argmin_g;
    report.audit.insert(
        0,
        AuditEntry {
            quantity: "min_g".into(),
            value: min_g,
            formula: "min_{0<=x<=1/4} sum_j a_j cos(2 pi j x/u)".into(),
        },
    );
    Ok(report)
}

/// [`certify`] with the gain supplied directly.
pub fn certify_with_gain(params: &CertificateParams, gain: f64) -> Result<BoundReport, CertError> {
    let basic = params.basic_bound(gain)?;
    let mut report = BoundReport {
        min_g: f64::NAN,
        argmin_g: f64::NAN,
        gain,
        basic_bound: basic,
        z1_threshold: f64::NAN,
        l_at_threshold: f64::NAN,
        forbidden_interval: None,
        certified_bound: basic,
        audit: Vec::new(),
        diagnostic: None,
    };
    report.push("delta", params.delta, "input");
    report.push("u", params.u, "1/2 + delta");
    report.push("k2sq_bound", params.k2sq_bound, "||K||_2^2 bound (0.5747/delta)");
    report.push("k1", params.k1, "J0(pi delta)^2");
    report.push("gain", gain, "(4/u) (min G)^2 / sum_j a_j^2 / J0(pi delta j/u)^2");
    report.push("basic_bound", basic, "min s: s + 1 + sqrt(s-1) sqrt(||K||^2-1) >= 2/u + a");

    if let Err(e) = params.modified_bound_l(gain, 0.0) {
        report.diagnostic = Some(format!("first-coefficient refinement unavailable: {e}"));
        return Ok(report);
    }

    // phi(s0) = min_{[0, z_max(s0)]} l - s0 is decreasing in s0.
    let phi = |s0: f64| -> f64 {
        let z_max = z_threshold(s0);
        min_l(params, gain, z_max) - s0
    };
    let l0 = params.modified_bound_l(gain, 0.0).expect("checked above");
    let (mut lo, mut hi) = (basic.max(1.0), l0.max(basic));
    if phi(lo) < 0.0 {
        report.diagnostic = Some(format!(
            "z1 argument does not close at the basic bound {basic}: keeping it"
        ));
        return Ok(report);
    }
    if phi(hi) >= 0.0 {
        lo = hi;
    } else {
        while hi - lo > CERTIFY_TOL {
            let mid = 0.5 * (lo + hi);
            if phi(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let certified = lo;
    let z_max = z_threshold(certified);
    let l_at = params.modified_bound_l(gain, z_max).expect("domain checked");
    report.certified_bound = certified;
    report.z1_threshold = z_max;
    report.l_at_threshold = l_at;
    report.forbidden_interval = params
        .forbidden_set(gain, certified)
        .ok()
        .and_then(|set| set.first().copied());
    report.push("z1_threshold", z_max, "sqrt((s0/pi) sin(pi/s0))");
    report.push("l_at_threshold", l_at, "l(z1_threshold)");
    if let Some((a, b)) = report.forbidden_interval {
        report.push("forbidden_lo", a, "inf {z : l(z) < s0}");
        report.push("forbidden_hi", b, "sup {z : l(z) < s0}");
    }
    report.push("certified_bound", certified, "max s0 with min_{z <= z1_threshold} l(z) >= s0");
    Ok(report)
}

/// `sqrt((s0/pi) sin(pi/s0))`, capped at 1 (`|f^(1)| <= 1` anyway).
fn z_threshold(s0: f64) -> f64 {
    lemma_h_bound(s0.max(1.0)).map(f64::sqrt).unwrap_or(1.0).min(1.0)
}

fn min_l(params: &CertificateParams, gain: f64, z_max: f64) -> f64 {
    let l = |z: f64| params.modified_bound_l(gain, z).unwrap_or(f64::INFINITY);
    let step = z_max / Z_SCAN as f64;
    let (mut best_i, mut best) = (0, l(0.0));
    for i in 1..=Z_SCAN {
        let v = l(i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    if step > 0.0 {
        let lo = (best_i.max(1) - 1) as f64 * step;
        let hi = (best_i + 1).min(Z_SCAN) as f64 * step;
        let (_, v) = numeric::golden_section_min(l, lo, hi, 1e-12);
        best = best.min(v);
    }
    best
}
