//! Random corpora and checks shared by the invariant tests and the
//! acceptance run. Each check returns the number of cases examined.
#![allow(dead_code)]

use autoconv_core::lowerbound::{self, kernel, CertificateParams};
use autoconv_core::lp::{LinearProgram, LpStatus};
use autoconv_core::stepfn::{convolve, Normalization, PiecewiseLinear, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SAMPLES: usize = 1000;
pub const DELTA: f64 = 0.138;

pub type Check = Result<usize, String>;

/// Unit-integral random step functions; some with zero cells, some spiky.
pub fn corpus(seed: u64, min_n: usize, max_n: usize) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SAMPLES)
        .map(|i| {
            let n = rng.gen_range(min_n..=max_n);
            let mut coeffs: Vec<f64> = (0..n)
                .map(|_| match i % 3 {
                    0 => rng.gen::<f64>(),
                    1 => {
                        if rng.gen_bool(0.3) {
                            0.0
                        } else {
                            rng.gen::<f64>()
                        }
                    }
                    _ => rng.gen::<f64>().powi(6),
                })
                .collect();
            if coeffs.iter().all(|&c| c == 0.0) {
                coeffs[0] = 1.0;
            }
            StepFunction::new(coeffs)
                .unwrap()
                .normalize(Normalization::UnitIntegral)
                .unwrap()
        })
        .collect()
}

fn each(seed: u64, min_n: usize, max_n: usize, check: impl Fn(&StepFunction) -> Result<(), String>) -> Check {
    let fs = corpus(seed, min_n, max_n);
    for (i, f) in fs.iter().enumerate() {
        check(f).map_err(|e| format!("sample {i} (n = {}): {e}", f.n()))?;
    }
    Ok(fs.len())
}

pub fn mass_conservation() -> Check {
    each(1, 1, 60, |f| {
        let m = f.integral();
        let (a, b) = (f.autoconvolve().integral(), f.autocorrelate().integral());
        if (a - m * m).abs() < 1e-12 && (b - m * m).abs() < 1e-12 {
            Ok(())
        } else {
            Err(format!("masses {a}, {b} vs {}", m * m))
        }
    })
}

/// `int (f*f) K <= sup(f*f)`.
pub fn kernel_average_below_sup() -> Check {
    each(2, 10, 60, |f| {
        let k = kernel::kernel_step(DELTA, f.cell_width());
        let g = f.autoconvolve();
        let lhs = g.inner_product(&k).unwrap();
        if lhs <= g.sup_norm() + 1e-8 {
            Ok(())
        } else {
            Err(format!("{lhs} > {}", g.sup_norm()))
        }
    })
}

/// `int (f o f) K <= 1 + sqrt(sup - 1) sqrt(||K||^2 - 1)`.
pub fn autocorrelation_norm_bound() -> Check {
    each(3, 10, 60, |f| {
        let k = kernel::kernel_step(DELTA, f.cell_width());
        let lhs = f.autocorrelate().inner_product(&k).unwrap();
        let s = f.unit_sup();
        let rhs = 1.0 + (s - 1.0).sqrt() * (k.l2sq() - 1.0).sqrt();
        if lhs <= rhs + 1e-8 {
            Ok(())
        } else {
            Err(format!("{lhs} > {rhs}"))
        }
    })
}

/// `int (f*f + f o f) K = 2 ||f_s * beta||^2` for `K = beta o beta`.
pub fn parseval_identity() -> Check {
    each(4, 10, 60, |f| {
        let h = f.cell_width();
        let k = kernel::kernel_step(DELTA, h);
        let lhs = f.autoconvolve().inner_product(&k).unwrap() + f.autocorrelate().inner_product(&k).unwrap();
        let (_, w) = kernel::beta_cells(DELTA, h);
        let conv = convolve(f.symmetrize().coeffs(), &w);
        let rhs = 2.0 * PiecewiseLinear::new(h, 0.0, conv.iter().map(|c| c * h).collect()).l2sq();
        if (lhs - rhs).abs() < 1e-5 {
            Ok(())
        } else {
            Err(format!("{lhs} vs {rhs}"))
        }
    })
}

/// `u^2 sum_{j != 0} (Re f~(j))^2 K~(j) >= (min G)^2 / sum_j G~(j)^2 / K~(j)`,
/// the left side truncated at `|j| <= 2000`.
pub fn fourier_cauchy_schwarz() -> Check {
    let params = CertificateParams::bundled();
    let rhs = params.gain().map_err(|e| e.to_string())? / 2.0;
    let u = params.u;
    let kt: Vec<f64> = (1..=2000).map(|j| params.kernel_tilde(j)).collect();
    each(5, 2, 30, |f| {
        let sum: f64 = (1..=2000)
            .map(|j| {
                let re = f.fourier_tilde(j as i64, u).re;
                re * re * kt[j - 1]
            })
            .sum();
        let lhs = 2.0 * u * u * sum;
        if lhs >= rhs - 1e-12 {
            Ok(())
        } else {
            Err(format!("{lhs} < {rhs}"))
        }
    })
}

/// `|f^(1)|^2 <= (M/pi) sin(pi/M)` with `M = sup(f*f)`.
pub fn first_coefficient_bound() -> Check {
    each(6, 1, 60, |f| {
        let z = f.fourier_hat(1.0).norm();
        let bound = lowerbound::lemma_h_bound(f.unit_sup()).map_err(|e| e.to_string())?;
        if z * z <= bound + 1e-12 {
            Ok(())
        } else {
            Err(format!("{} > {bound}", z * z))
        }
    })
}

/// Solves the square system by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        let pivot_row = m[col].clone();
        for r in 0..n {
            if r != col {
                let f = m[r][col] / pivot_row[col];
                for (v, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * p;
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn subsets(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            cur.push(i);
            rec(i + 1, total, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, k, &mut Vec::new(), &mut out);
    out
}

/// Best objective over all basic feasible solutions.
pub fn brute_force(lp: &LinearProgram) -> f64 {
    let (m, n) = (lp.rows(), lp.cols());
    // Constraint i < m is row i of A, constraint m + j is -x_j <= 0.
    let row = |i: usize| -> (Vec<f64>, f64) {
        if i < m {
            (lp.row(i).to_vec(), lp.bounds[i])
        } else {
            let mut r = vec![0.0; n];
            r[i - m] = -1.0;
            (r, 0.0)
        }
    };
    let mut best = f64::NEG_INFINITY;
    for set in subsets(m + n, n) {
        let (a, b): (Vec<_>, Vec<_>) = set.iter().map(|&i| row(i)).unzip();
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                best = best.max(lp.value(&x));
            }
        }
    }
    best
}

/// Up to 6 variables and 8 constraints; a strictly positive first row keeps
/// every instance bounded.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    let mut matrix: Vec<f64> = (0..m * n)
        .map(|_| if rng.gen_bool(0.2) { -rng.gen::<f64>() } else { rng.gen::<f64>() })
        .collect();
    for v in &mut matrix[..n] {
        *v = 0.1 + rng.gen::<f64>();
    }
    let bounds = (0..m).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen::<f64>() * 3.0 }).collect();
    let objective = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 0.3).collect();
    LinearProgram::new(objective, matrix, bounds).unwrap()
}

pub fn lp_matches_enumeration(instances: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..instances {
        let lp = random_lp(&mut rng);
        let sol = lp.solve(10_000);
        if sol.status != LpStatus::Optimal {
            return Err(format!("instance {i}: status {:?}", sol.status));
        }
        let oracle = brute_force(&lp);
        if (sol.objective_value - oracle).abs() >= 1e-8 || lp.max_violation(&sol.x) > 1e-7 {
            return Err(format!("instance {i}: {} vs {oracle}", sol.objective_value));
        }
    }
    Ok(instances)
}
