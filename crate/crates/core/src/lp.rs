//! Dense primal simplex for `max c.x` subject to `A x <= b`, `x >= 0`, `b >= 0`.
//!
//! The origin is always feasible, so the slack basis starts phase two
//! directly. Pricing is Dantzig's largest reduced cost until the pivot count
//! passes `10 (rows + cols)`, then Bland's rule, which cannot cycle.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-9;
pub const VERIFY_TOL: f64 = 1e-7;
/// Tableau size (entries) above which row updates run in parallel.
const PARALLEL_ENTRIES: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint matrix has {got} entries, expected {rows} x {cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("right-hand side b[{0}] = {1} is negative or not finite")]
    NegativeBound(usize, f64),
    #[error("non-finite entry in the objective or constraint matrix")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Row-major, `rows x objective.len()`.
    pub matrix: Vec<f64>,
    pub bounds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    /// Shadow prices of the constraints (meaningful when optimal).
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, matrix: Vec<f64>, bounds: Vec<f64>) -> Result<Self, LpError> {
        let (rows, cols) = (bounds.len(), objective.len());
        if matrix.len() != rows * cols {
            return Err(LpError::Shape { rows, cols, got: matrix.len() });
        }
        if let Some((i, &v)) = bounds.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(LpError::NegativeBound(i, v));
        }
        if objective.iter().chain(&matrix).any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        Ok(Self { objective, matrix, bounds })
    }

    pub fn rows(&self) -> usize {
        self.bounds.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols();
        &self.matrix[i * n..(i + 1) * n]
    }

    /// Largest violation of `A x <= b` and `x >= 0`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = (0..self.rows()).map(|i| {
            let ax: f64 = self.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            ax - self.bounds[i]
        });
        rows.chain(x.iter().map(|v| -v)).fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self, max_pivots: usize) -> LpSolution {
        Tableau::new(self).run(max_pivots)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Structural columns, then slacks, then the right-hand side.
    width: usize,
    data: Vec<f64>,
    /// Reduced costs `c_j - c_B B^-1 A_j`, followed by the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let (rows, cols) = (lp.rows(), lp.cols());
        let width = cols + rows + 1;
        let mut data = vec![0.0; rows * width];
        for i in 0..rows {
            let r = &mut data[i * width..(i + 1) * width];
            r[..cols].copy_from_slice(lp.row(i));
            r[cols + i] = 1.0;
            r[width - 1] = lp.bounds[i];
        }
        let mut cost = vec![0.0; width];
        cost[..cols].copy_from_slice(&lp.objective);
        Self {
            rows,
            cols,
            width,
            data,
            cost,
            basis: (cols..cols + rows).collect(),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = self.cost[..self.width - 1].iter().enumerate().filter(|(_, &c)| c > PIVOT_TOL);
        if bland {
            candidates.map(|(j, _)| j).next()
        } else {
            candidates
                .fold(None, |best: Option<(usize, f64)>, (j, &c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((j, c)),
                })
                .map(|(j, _)| j)
        }
    }

    /// Harris two-pass ratio test: bound the step with every basic value
    /// allowed to dip by `PIVOT_TOL`, then take the largest pivot element among
    /// rows that block within that bound. Under Bland's rule the smallest
    /// exact ratio wins instead, ties to the smallest basic variable index.
    fn leaving(&self, col: usize, bland: bool) -> Option<usize> {
        let rhs = self.width - 1;
        let rows = (0..self.rows).filter(|&i| self.at(i, col) > PIVOT_TOL);
        if bland {
            return rows.min_by(|&i, &k| {
                let (ri, rk) = (self.at(i, rhs) / self.at(i, col), self.at(k, rhs) / self.at(k, col));
                ri.total_cmp(&rk).then(self.basis[i].cmp(&self.basis[k]))
            });
        }
        let bound = rows
            .clone()
            .map(|i| (self.at(i, rhs) + PIVOT_TOL) / self.at(i, col))
            .fold(f64::INFINITY, f64::min);
        if bound.is_infinite() {
            return None;
        }
        rows.filter(|&i| self.at(i, rhs) / self.at(i, col) <= bound)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if self.at(b, col) >= self.at(i, col) => Some(b),
                _ => Some(i),
            })
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, c);
        let mut pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        pivot_row.iter_mut().for_each(|v| *v *= inv);
        pivot_row[c] = 1.0;
        let update = |i: usize, row: &mut [f64]| {
            if i == r {
                row.copy_from_slice(&pivot_row);
                return;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[c] = 0.0;
            }
        };
        if self.data.len() >= PARALLEL_ENTRIES {
            self.data.par_chunks_mut(w).enumerate().for_each(|(i, row)| update(i, row));
        } else {
            self.data.chunks_mut(w).enumerate().for_each(|(i, row)| update(i, row));
        }
        // Basic values that drifted below zero by rounding are reset, otherwise
        // a later pivot on a small element turns them into real infeasibility.
        for row in self.data.chunks_mut(w) {
            if row[w - 1] < 0.0 {
                row[w - 1] = 0.0;
            }
        }
        let factor = self.cost[c];
        for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
            *v -= factor * p;
        }
        self.cost[c] = 0.0;
        self.basis[r] = c;
    }

    fn run(mut self, max_pivots: usize) -> LpSolution {
        let bland_after = 10 * (self.rows + self.cols);
        let mut pivots = 0;
        let status = loop {
            let Some(col) = self.entering(pivots >= bland_after) else {
                break LpStatus::Optimal;
            };
            let Some(row) = self.leaving(col, pivots >= bland_after) else {
                break LpStatus::Unbounded;
            };
            if pivots >= max_pivots {
                break LpStatus::IterationLimit;
            }
            self.pivot(row, col);
            pivots += 1;
        };
        let mut x = vec![0.0; self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.cols {
                x[b] = self.at(i, self.width - 1).max(0.0);
            }
        }
        let duals = (0..self.rows).map(|i| -self.cost[self.cols + i]).collect();
        LpSolution {
            objective_value: -self.cost[self.width - 1],
            x,
            status,
            duals,
            pivots,
        }
    }
}
