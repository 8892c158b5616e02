//! Dense two-phase simplex for small linear programs.
//!
//! Maximizes `c·x` over `{x : G x <= g}` with free variables. Free variables
//! are split into positive/negative parts and slacks complete the basis, so
//! the tableau stays tiny for the problem sizes that arise here (a handful of
//! variables, a few hundred rows). Bland's rule keeps pivoting deterministic
//! and cycle-free.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Objective to maximize.
    pub objective: DVector<f64>,
    /// Constraint rows, `constraints * x <= rhs`.
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl LpProblem {
    pub fn new(objective: DVector<f64>, constraints: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        Self {
            objective,
            constraints,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Optimal value and a maximizer.
    Optimal { value: f64, point: DVector<f64> },
    Unbounded,
    Infeasible,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("dimension mismatch: objective has {objective} entries, constraints are {rows}x{cols} with {rhs} rhs entries")]
    DimensionMismatch {
        objective: usize,
        rows: usize,
        cols: usize,
        rhs: usize,
    },
    #[error("pivot cap reached after {0} iterations (degenerate problem?)")]
    IterationLimit(usize),
    #[error("non-finite entry in problem data")]
    NonFinite,
}

/// Simplex tableau over structural columns (x+, x-), slack columns and, in
/// phase 1, artificial columns.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.at(pr, pc);
        let inv = 1.0 / piv;
        for c in 0..self.cols {
            self.data[pr * self.cols + c] *= inv;
        }
        self.rhs[pr] *= inv;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            for c in 0..self.cols {
                let v = self.at(pr, c);
                self.data[r * self.cols + c] -= f * v;
            }
            self.rhs[r] -= f * self.rhs[pr];
        }
        self.basis[pr] = pc;
    }

    /// One simplex phase on the given objective (maximization, reduced-cost
    /// form rebuilt from the basis each iteration). Bland's rule. Columns at
    /// or beyond `enter_limit` may not enter the basis.
    fn run(&mut self, obj: &[f64], cap: usize, enter_limit: usize) -> Result<(), LpPhase> {
        for _ in 0..cap {
            // reduced costs: cj - cb' B^-1 Aj, computed from the current tableau
            let mut entering = None;
            for c in 0..enter_limit {
                if self.basis.contains(&c) {
                    continue;
                }
                let mut red = obj[c];
                for r in 0..self.rows {
                    red -= obj[self.basis[r]] * self.at(r, c);
                }
                if red > OPT_TOL {
                    entering = Some(c);
                    break; // Bland: lowest index
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            // ratio test, Bland tie-break on lowest basis index
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > FEAS_TOL {
                    let ratio = self.rhs[r] / a;
                    match leaving {
                        None => leaving = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - FEAS_TOL
                                || (ratio < lratio + FEAS_TOL && self.basis[r] < self.basis[lr])
                            {
                                leaving = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, _)) = leaving else {
                return Err(LpPhase::Unbounded);
            };
            self.pivot(pr, pc);
        }
        Err(LpPhase::IterationLimit)
    }
}

enum LpPhase {
    Unbounded,
    IterationLimit,
}

/// Solve `max c·x  s.t.  G x <= g` with `x` free.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome, LpError> {
    let m = p.constraints.nrows();
    let d = p.constraints.ncols();
    if p.objective.len() != d || p.rhs.len() != m {
        return Err(LpError::DimensionMismatch {
            objective: p.objective.len(),
            rows: m,
            cols: d,
            rhs: p.rhs.len(),
        });
    }
    if p.objective.iter().any(|v| !v.is_finite())
        || p.constraints.iter().any(|v| !v.is_finite())
        || p.rhs.iter().any(|v| !v.is_finite())
    {
        return Err(LpError::NonFinite);
    }

    // columns: x+ (d), x- (d), slack (m), then artificials for rows with g < 0
    let neg_rows: Vec<usize> = (0..m).filter(|&r| p.rhs[r] < 0.0).collect();
    let n_struct = 2 * d + m;
    let cols = n_struct + neg_rows.len();
    let mut data = vec![0.0; m * cols];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0usize; m];
    for r in 0..m {
        let sign = if p.rhs[r] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..d {
            data[r * cols + c] = sign * p.constraints[(r, c)];
            data[r * cols + d + c] = -sign * p.constraints[(r, c)];
        }
        data[r * cols + 2 * d + r] = sign;
        rhs[r] = sign * p.rhs[r];
        basis[r] = 2 * d + r;
    }
    for (k, &r) in neg_rows.iter().enumerate() {
        data[r * cols + n_struct + k] = 1.0;
        basis[r] = n_struct + k;
    }

    let mut t = Tableau {
        rows: m,
        cols,
        data,
        rhs,
        basis,
    };
    let cap = 10 * (m + cols);

    // phase 1: drive artificials to zero
    if !neg_rows.is_empty() {
        let mut obj1 = vec![0.0; cols];
        for k in 0..neg_rows.len() {
            obj1[n_struct + k] = -1.0;
        }
        match t.run(&obj1, cap, cols) {
            Ok(()) => {}
            Err(LpPhase::Unbounded) => unreachable!("phase-1 objective is bounded"),
            Err(LpPhase::IterationLimit) => return Err(LpError::IterationLimit(cap)),
        }
        let infeas: f64 = t
            .basis
            .iter()
            .zip(t.rhs.iter())
            .filter(|(b, _)| **b >= n_struct)
            .map(|(_, v)| v.abs())
            .sum();
        if infeas > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // pivot any degenerate artificial out of the basis
        for r in 0..m {
            if t.basis[r] >= n_struct {
                if let Some(c) = (0..n_struct).find(|&c| t.at(r, c).abs() > FEAS_TOL) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2
    let mut obj2 = vec![0.0; cols];
    for c in 0..d {
        obj2[c] = p.objective[c];
        obj2[d + c] = -p.objective[c];
    }
    match t.run(&obj2, cap, n_struct) {
        Ok(()) => {}
        Err(LpPhase::Unbounded) => return Ok(LpOutcome::Unbounded),
        Err(LpPhase::IterationLimit) => return Err(LpError::IterationLimit(cap)),
    }

    let mut x = DVector::zeros(d);
    for r in 0..m {
        let b = t.basis[r];
        if b < d {
            x[b] += t.rhs[r];
        } else if b < 2 * d {
            x[b - d] -= t.rhs[r];
        }
    }
    let value = p.objective.dot(&x);
    Ok(LpOutcome::Optimal { value, point: x })
}
