//! Local search for step functions with small `sup(f*f)`.
//!
//! One step of [`iterate`]: with `f` scaled so `sum a = sqrt(2n)`, solve the
//! LP "maximize `sum b` subject to `(a*b)_k <= max(a*a)` and `b >= 0`", scale
//! the optimum to `g = sqrt(2n) b / sum b`, and move to the best point
//! `(1-t) f + t g` on the segment. When that stalls, a coordinate-descent
//! [`polish`] pass is tried before declaring a fixpoint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, LpStatus};
use crate::numeric;
use crate::stepfn::{convolve, sup_ratio, Normalization, StepError, StepFunction};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Initial polish step as a fraction of the mean coefficient.
pub const DEFAULT_POLISH_FRACTION: f64 = 0.05;
const MIX_GRID: usize = 2000;
const MIX_TOL: f64 = 1e-10;
/// Relative differences in `phi` below this are rounding noise.
const FLAT: f64 = 1e-14;
const POLISH_MIN_STEP: f64 = 1e-6;
const POLISH_SWEEPS: usize = 200;
const LP_FEASIBILITY: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP ended with status {0:?}")]
    LpStatus(LpStatus),
    #[error("LP solution violates a constraint by {0:e}")]
    LpInfeasible(f64),
    #[error("the LP step needs a nonnegative function")]
    SignedInput,
    #[error("step functions have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
}

/// `sup(f*f)` for unit-integral scaling.
pub fn sup(f: &StepFunction) -> f64 {
    sup_ratio(f.coeffs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpStep {
    /// The input, scaled to `sum a = sqrt(2n)`.
    pub f: StepFunction,
    /// The LP optimum rescaled to `sum = sqrt(2n)`.
    pub g: StepFunction,
    /// `sum b` at the LP optimum (at least `sqrt(2n)`).
    pub lp_sum: f64,
}

/// The LP step. `(f * g)` stays below `max(f*f)` and `sum b >= sum a`.
pub fn lp_improve(f: &StepFunction) -> Result<LpStep, SearchError> {
    if f.has_negative() {
        return Err(SearchError::SignedInput);
    }
    let f = f.normalize(Normalization::Polynomial)?;
    let a = f.coeffs();
    let n = a.len();
    let rows = 2 * n - 1;
    let peak = convolve(a, a).into_iter().fold(0.0, f64::max);
    let mut matrix = vec![0.0; rows * n];
    for j in 0..n {
        for (i, &ai) in a.iter().enumerate() {
            matrix[(i + j) * n + j] = ai;
        }
    }
    let lp = LinearProgram::new(vec![1.0; n], matrix, vec![peak; rows])?;
    let solution = lp.solve(100 * (rows + n));
    if solution.status != LpStatus::Optimal {
        return Err(SearchError::LpStatus(solution.status));
    }
    let violation = lp.max_violation(&solution.x);
    if violation > LP_FEASIBILITY * peak.max(1.0) {
        return Err(SearchError::LpInfeasible(violation));
    }
    let lp_sum: f64 = solution.x.iter().sum();
    let target = (2.0 * n as f64).sqrt();
    let g = StepFunction::new(solution.x.iter().map(|b| b * target / lp_sum).collect())?;
    Ok(LpStep { f, g, lp_sum })
}

/// Minimizes `phi(t) = max_k (((1-t) a + t g) * ((1-t) a + t g))_k` over
/// `t in [0, 1]`. `phi` is a maximum of quadratics that need not be convex, so
/// a grid scan picks the basin and golden-section search refines it. Ties
/// prefer the smaller `t`.
pub fn mix_line_search(f: &StepFunction, g: &StepFunction) -> Result<(f64, StepFunction), SearchError> {
    if f.n() != g.n() {
        return Err(SearchError::LengthMismatch(f.n(), g.n()));
    }
    let (a, b) = (f.coeffs(), g.coeffs());
    let aa = convolve(a, a);
    let ab = convolve(a, b);
    let bb = convolve(b, b);
    let phi = |t: f64| {
        let s = 1.0 - t;
        let (c0, c1, c2) = (s * s, 2.0 * s * t, t * t);
        (0..aa.len())
            .map(|k| c0 * aa[k] + c1 * ab[k] + c2 * bb[k])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let step = 1.0 / MIX_GRID as f64;
    let (mut best_i, mut best) = (0, phi(0.0));
    for i in 1..=MIX_GRID {
        let v = phi(i as f64 * step);
        if v < best - FLAT * best.abs() {
            best = v;
            best_i = i;
        }
    }
    let mut t = best_i as f64 * step;
    let lo = best_i.saturating_sub(1) as f64 * step;
    let hi = (best_i + 1).min(MIX_GRID) as f64 * step;
    let (tg, vg) = numeric::golden_section_min(phi, lo, hi, MIX_TOL);
    if vg < best - FLAT * best.abs() {
        t = tg;
    }
    let mixed = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    Ok((t, StepFunction::with_sign(mixed, f.is_signed() || g.is_signed())?))
}

/// Cyclic coordinate descent on `sup(f*f)`: each coefficient in turn is moved
/// by `+step` or `-step` (first improvement wins), and the step halves after a
/// sweep without progress, down to 1e-6, for at most 200 sweeps. The input is
/// rescaled to `sum a = sqrt(2n)` first, which is also the scale `step` refers
/// to. Nonnegative inputs stay nonnegative; signed inputs may change sign.
/// Never increases `sup(f*f)`.
pub fn polish(f: &StepFunction, step: f64) -> Result<StepFunction, SearchError> {
    let f = f.normalize(Normalization::Polynomial)?;
    let signed = f.is_signed();
    let mut a = f.into_coeffs();
    let n = a.len();
    let scale = 2.0 * n as f64;
    let mut conv = convolve(&a, &a);
    let mut sum: f64 = a.iter().sum();
    let mut best = scale * conv.iter().copied().fold(0.0, f64::max) / (sum * sum);
    let mut step = step;
    let mut sweeps = 0;
    while step > POLISH_MIN_STEP && sweeps < POLISH_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for j in 0..n {
            for dir in [step, -step] {
                let new = if signed { a[j] + dir } else { (a[j] + dir).max(0.0) };
                let d = new - a[j];
                let new_sum = sum + d;
                if d == 0.0 || new_sum <= 0.0 {
                    continue;
                }
                let mut peak = 0.0_f64;
                for (k, &c) in conv.iter().enumerate() {
                    let mut v = c;
                    if k >= j && k - j < n {
                        v += 2.0 * d * a[k - j];
                    }
                    if k == 2 * j {
                        v += d * d;
                    }
                    peak = peak.max(v);
                }
                let value = scale * peak / (new_sum * new_sum);
                if value < best - 1e-15 {
                    for (i, &ai) in a.iter().enumerate() {
                        conv[i + j] += 2.0 * d * ai;
                    }
                    conv[2 * j] += d * d;
                    a[j] = new;
                    sum = new_sum;
                    best = value;
                    improved = true;
                    break;
                }
            }
        }
        // Refresh the running convolution so rounding cannot accumulate.
        conv = convolve(&a, &a);
        sum = a.iter().sum();
        best = scale * conv.iter().copied().fold(0.0, f64::max) / (sum * sum);
        if !improved {
            step *= 0.5;
        }
    }
    Ok(StepFunction::with_sign(a, signed)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Mix,
    Polish,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub sup: f64,
    /// LP optimum `sum b` (`sqrt(2n)` scale) computed at this step; NaN in
    /// signed mode, where no LP is solved.
    pub lp_sum: f64,
    /// Mixing parameter; 0 for polish steps.
    pub t: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTrace {
    pub initial_sup: f64,
    pub iterations: Vec<TraceStep>,
    pub best: StepFunction,
    pub converged: bool,
}

impl SearchTrace {
    pub fn best_sup(&self) -> f64 {
        self.iterations.last().map_or(self.initial_sup, |s| s.sup)
    }

    /// One line per accepted step: `index sup sum_b t`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# index sup sum_b t\n");
        for (i, s) in self.iterations.iter().enumerate() {
            out.push_str(&format!("{} {:?} {:?} {:?}\n", i + 1, s.sup, s.lp_sum, s.t));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Polish fallback step (fraction of the mean coefficient); `None` runs
    /// the bare LP-and-mix iteration.
    pub polish_fraction: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            polish_fraction: Some(DEFAULT_POLISH_FRACTION),
        }
    }
}

/// [`iterate_with`] using the default polish fallback.
pub fn iterate(f0: &StepFunction, tol: f64, max_iter: usize) -> Result<SearchTrace, SearchError> {
    iterate_with(
        f0,
        &SearchOptions {
            tol,
            max_iter,
            ..SearchOptions::default()
        },
    )
}

/// Repeats LP step + mixing until `sup` improves by less than `tol` (or the LP
/// gain `sum b - sum a` drops below `tol`); at that point a polish pass gets
/// one chance to continue. Signed inputs skip the LP and run polish only.
pub fn iterate_with(f0: &StepFunction, opts: &SearchOptions) -> Result<SearchTrace, SearchError> {
    let mut f = f0.normalize(Normalization::Polynomial)?;
    let initial_sup = sup(&f);
    let mut current = initial_sup;
    let mut iterations = Vec::new();
    let polish_step = |f: &StepFunction, fraction: f64| polish(f, fraction * f.coeff_sum() / f.n() as f64);

    if f.is_signed() {
        let fraction = opts.polish_fraction.unwrap_or(DEFAULT_POLISH_FRACTION);
        let mut converged = false;
        for _ in 0..opts.max_iter {
            let p = polish_step(&f, fraction)?;
            let s = sup(&p);
            if current - s < opts.tol {
                converged = true;
                break;
            }
            iterations.push(TraceStep { sup: s, lp_sum: f64::NAN, t: 0.0, kind: StepKind::Polish });
            f = p;
            current = s;
        }
        return Ok(SearchTrace { initial_sup, iterations, best: f, converged });
    }

    let target = (2.0 * f.n() as f64).sqrt();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let step = lp_improve(&f)?;
        let (t, h) = mix_line_search(&step.f, &step.g)?;
        let s = sup(&h);
        if step.lp_sum - target >= opts.tol && current - s >= opts.tol {
            iterations.push(TraceStep { sup: s, lp_sum: step.lp_sum, t, kind: StepKind::Mix });
            f = h;
            current = s;
            continue;
        }
        let Some(fraction) = opts.polish_fraction else {
            converged = true;
            break;
        };
        let p = polish_step(&step.f, fraction)?;
        let s = sup(&p);
        if current - s < opts.tol {
            converged = true;
            break;
        }
        iterations.push(TraceStep { sup: s, lp_sum: step.lp_sum, t: 0.0, kind: StepKind::Polish });
        f = p;
        current = s;
    }
    Ok(SearchTrace { initial_sup, iterations, best: f, converged })
}

/// The random starts used by [`restart_harness`]: i.i.d. uniform(0, 1)
/// heights, polynomial-normalized, one ChaCha stream per start.
pub fn random_starts(n: usize, restarts: usize, seed: u64) -> Result<Vec<StepFunction>, SearchError> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..restarts).map(|_| master.gen()).collect();
    seeds
        .into_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            Ok(StepFunction::new(coeffs)?.normalize(Normalization::Polynomial)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub best: SearchTrace,
    pub best_index: usize,
    pub final_sups: Vec<f64>,
}

/// Runs [`iterate_with`] from each of [`random_starts`] in parallel and keeps
/// the lowest final `sup` (earliest start on ties). Deterministic in `seed`.
pub fn restart_harness(
    n: usize,
    restarts: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<RestartOutcome, SearchError> {
    assert!(restarts >= 1, "need at least one restart");
    let starts = random_starts(n, restarts, seed)?;
    let traces = starts
        .par_iter()
        .map(|f| iterate_with(f, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let final_sups: Vec<f64> = traces.iter().map(SearchTrace::best_sup).collect();
    let best_index = (0..traces.len())
        .fold(0, |b, i| if final_sups[i] < final_sups[b] { i } else { b });
    let best = traces.into_iter().nth(best_index).expect("index in range");
    Ok(RestartOutcome { best, best_index, final_sups })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(v: &[f64]) -> StepFunction {
        StepFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lp_step_is_feasible_and_not_worse() {
        let f = step(&[1.0, 0.3, 0.8, 0.5, 0.9]);
        let r = lp_improve(&f).unwrap();
        let target = 10f64.sqrt();
        assert!(r.lp_sum >= target - 1e-9);
        let scale = r.lp_sum / target;
        let fa = convolve(r.f.coeffs(), r.f.coeffs());
        let fg = convolve(r.f.coeffs(), r.g.coeffs());
        let peak = fa.iter().copied().fold(0.0, f64::max);
        assert!(fg.iter().all(|v| v * scale <= peak + 1e-7));
    }

    #[test]
    fn lp_rejects_signed_input() {
        let f = StepFunction::signed(vec![1.0, -0.1, 1.0]).unwrap();
        assert_eq!(lp_improve(&f), Err(SearchError::SignedInput));
    }

    #[test]
    fn mixing_with_itself_stays_put() {
        let f = step(&[1.0, 2.0, 0.5]).normalize(Normalization::Polynomial).unwrap();
        let (t, h) = mix_line_search(&f, &f).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(h, f);
    }

    #[test]
    fn mixing_beats_both_endpoints() {
        let f = step(&[1.0; 10]).normalize(Normalization::Polynomial).unwrap();
        let g = step(&[2.0, 0.1, 0.1, 1.0, 0.5, 0.5, 1.0, 0.1, 0.1, 2.0])
            .normalize(Normalization::Polynomial)
            .unwrap();
        let (_, h) = mix_line_search(&f, &g).unwrap();
        assert!(sup(&h) <= sup(&f).min(sup(&g)) + 1e-12);
    }

    #[test]
    fn mixing_rejects_length_mismatch() {
        assert_eq!(
            mix_line_search(&step(&[1.0]), &step(&[1.0, 1.0])),
            Err(SearchError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn polish_never_increases_sup() {
        let f = step(&[0.2, 1.0, 0.1, 0.7, 0.4, 0.9]);
        let p = polish(&f, 0.05).unwrap();
        assert!(sup(&p) <= sup(&f) + 1e-15);
        assert!(p.coeffs().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn trace_text_has_one_line_per_step() {
        let trace = iterate(&step(&[1.0; 6]), DEFAULT_TOL, 20).unwrap();
        let text = trace.to_text();
        assert_eq!(text.lines().count(), trace.iterations.len() + 1);
        let sups: Vec<f64> = trace.iterations.iter().map(|s| s.sup).collect();
        assert!(sups.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn random_starts_are_deterministic() {
        let a = random_starts(8, 3, 42).unwrap();
        assert_eq!(a, random_starts(8, 3, 42).unwrap());
        assert_ne!(a, random_starts(8, 3, 43).unwrap());
        assert!(a.iter().all(|f| (f.coeff_sum() - 4.0).abs() < 1e-12));
    }
}
