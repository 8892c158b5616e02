//! Halfspace-representation polytopes `{x : G x <= g}` and the LP-backed
//! geometry used to build and query invariant sets. No vertex enumeration
//! anywhere; redundancy and bounds go through the simplex solver.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::numerics::{solve_lp, LpError, LpOutcome, LpProblem};

/// Absolute tolerance for the redundancy test.
const REDUNDANCY_TOL: f64 = 1e-9;
/// Rows with smaller norm are treated as all-zero.
const ROW_NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PolytopeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero row with negative rhs {0} cannot be represented")]
    MalformedRow(f64),
    #[error("polytope must have at least one row")]
    NoRows,
    #[error("origin is not interior: rhs entry {0} is not strictly positive")]
    OriginNotInterior(f64),
    #[error("polytope is unbounded along axis {0}")]
    Unbounded(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("polytope is empty")]
    Empty,
}

/// `{x in R^d : rows * x <= rhs}` with zero rows dropped at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    rows: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl HPolytope {
    pub fn new(rows: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self, PolytopeError> {
        if rows.nrows() != rhs.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: rows.nrows(),
                got: rhs.len(),
            });
        }
        // drop near-zero rows with nonnegative rhs, reject the infeasible kind
        let mut keep = Vec::new();
        for r in 0..rows.nrows() {
            if rows.row(r).norm() < ROW_NORM_FLOOR {
                if rhs[r] < 0.0 {
                    return Err(PolytopeError::MalformedRow(rhs[r]));
                }
            } else {
                keep.push(r);
            }
        }
        if keep.is_empty() {
            return Err(PolytopeError::NoRows);
        }
        let kept_rows = DMatrix::from_fn(keep.len(), rows.ncols(), |i, j| rows[(keep[i], j)]);
        let kept_rhs = DVector::from_fn(keep.len(), |i, _| rhs[keep[i]]);
        Ok(Self {
            rows: kept_rows,
            rhs: kept_rhs,
        })
    }

    /// Axis-aligned box `lo <= x <= hi` componentwise.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self, PolytopeError> {
        if lo.len() != hi.len() {
            return Err(PolytopeError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let d = lo.len();
        let mut rows = DMatrix::zeros(2 * d, d);
        let mut rhs = DVector::zeros(2 * d);
        for i in 0..d {
            rows[(2 * i, i)] = 1.0;
            rhs[2 * i] = hi[i];
            rows[(2 * i + 1, i)] = -1.0;
            rhs[2 * i + 1] = -lo[i];
        }
        Self::new(rows, rhs)
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Membership `rows * x <= rhs - slack` componentwise.
    pub fn contains(&self, x: &DVector<f64>, slack: f64) -> Result<bool, PolytopeError> {
        if x.len() != self.dim() {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let vals = &self.rows * x;
        Ok((0..self.len()).all(|r| vals[r] <= self.rhs[r] - slack))
    }

    /// Gilbert-Tan stopping test: is `row . x <= rhs` implied by the set?
    /// An unbounded support LP means the candidate cuts the set, so: not
    /// redundant. An infeasible LP (empty set) is propagated as an error.
    pub fn is_redundant(&self, row: &DVector<f64>, rhs: f64) -> Result<bool, PolytopeError> {
        if row.len() != self.dim() {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        let p = LpProblem::new(row.clone(), self.rows.clone(), self.rhs.clone());
        match solve_lp(&p)? {
            LpOutcome::Optimal { value, .. } => Ok(value <= rhs + REDUNDANCY_TOL),
            LpOutcome::Unbounded => Ok(false),
            LpOutcome::Infeasible => Err(PolytopeError::Empty),
        }
    }

    /// `(min, max)` of coordinate `axis` over the set, via two LPs.
    pub fn coordinate_bounds(&self, axis: usize) -> Result<(f64, f64), PolytopeError> {
        if axis >= self.dim() {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim(),
                got: axis,
            });
        }
        let mut c = DVector::zeros(self.dim());
        c[axis] = 1.0;
        let hi = match solve_lp(&LpProblem::new(c.clone(), self.rows.clone(), self.rhs.clone()))? {
            LpOutcome::Optimal { value, .. } => value,
            LpOutcome::Unbounded => return Err(PolytopeError::Unbounded(axis)),
            LpOutcome::Infeasible => return Err(PolytopeError::Empty),
        };
        let lo = match solve_lp(&LpProblem::new(-c, self.rows.clone(), self.rhs.clone()))? {
            LpOutcome::Optimal { value, .. } => -value,
            LpOutcome::Unbounded => return Err(PolytopeError::Unbounded(axis)),
            LpOutcome::Infeasible => return Err(PolytopeError::Empty),
        };
        Ok((lo, hi))
    }

    /// Rescale every row so the right-hand side becomes 1. Valid only when the
    /// origin is strictly interior, i.e. every rhs entry is positive.
    pub fn normalize(&self) -> Result<Self, PolytopeError> {
        if let Some(bad) = self.rhs.iter().find(|v| **v <= 0.0) {
            return Err(PolytopeError::OriginNotInterior(*bad));
        }
        let mut rows = self.rows.clone();
        for r in 0..self.len() {
            let s = 1.0 / self.rhs[r];
            for c in 0..self.dim() {
                rows[(r, c)] *= s;
            }
        }
        Ok(Self {
            rows,
            rhs: DVector::from_element(self.len(), 1.0),
        })
    }

    /// Drop every row implied by the others. Keeps the first of two identical
    /// rows; the survivor keeps the set unchanged.
    pub fn pruned(&self) -> Result<Self, PolytopeError> {
        Ok(self.pruned_with_indices()?.0)
    }

    /// Like [`Self::pruned`], also reporting which original row indices
    /// survived, in order.
    pub fn pruned_with_indices(&self) -> Result<(Self, Vec<usize>), PolytopeError> {
        let mut keep: Vec<usize> = (0..self.len()).collect();
        let mut i = 0;
        while i < keep.len() && keep.len() > 1 {
            let others: Vec<usize> = keep
                .iter()
                .copied()
                .enumerate()
                .filter(|(pos, _)| *pos != i)
                .map(|(_, r)| r)
                .collect();
            let sub = self.select(&others);
            let row = DVector::from_iterator(self.dim(), self.rows.row(keep[i]).iter().copied());
            if sub.is_redundant(&row, self.rhs[keep[i]])? {
                keep.remove(i);
            } else {
                i += 1;
            }
        }
        Ok((self.select(&keep), keep))
    }

    fn select(&self, indices: &[usize]) -> Self {
        Self {
            rows: DMatrix::from_fn(indices.len(), self.dim(), |i, j| self.rows[(indices[i], j)]),
            rhs: DVector::from_fn(indices.len(), |i, _| self.rhs[indices[i]]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box(d: usize) -> HPolytope {
        HPolytope::from_bounds(&vec![-1.0; d], &vec![1.0; d]).unwrap()
    }

    #[test]
    fn contains_unit_box() {
        let p = unit_box(2);
        assert!(p.contains(&dvector![0.0, 0.0], 0.0).unwrap());
        assert!(!p.contains(&dvector![1.0 + 1e-6, 0.0], 0.0).unwrap());
        // boundary point is a member at slack 0, not at positive slack
        assert!(p.contains(&dvector![1.0, 0.0], 0.0).unwrap());
        assert!(!p.contains(&dvector![1.0, 0.0], 1e-12).unwrap());
    }

    #[test]
    fn redundancy_on_interval() {
        let p = HPolytope::new(dmatrix![1.0], dvector![1.0]).unwrap();
        assert!(p.is_redundant(&dvector![1.0], 2.0).unwrap());
        assert!(!p.is_redundant(&dvector![1.0], 0.5).unwrap());
    }

    #[test]
    fn coordinate_bounds_box_and_unbounded() {
        let p = unit_box(2);
        let (lo, hi) = p.coordinate_bounds(0).unwrap();
        assert!((lo + 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        // halfplane: unbounded along axis 1
        let h = HPolytope::new(dmatrix![1.0, 0.0], dvector![1.0]).unwrap();
        assert_eq!(h.coordinate_bounds(1), Err(PolytopeError::Unbounded(1)));
    }

    #[test]
    fn empty_polytope_bounds_error() {
        let p = HPolytope::new(dmatrix![1.0; -1.0], dvector![-1.0, -1.0]).unwrap();
        assert_eq!(p.coordinate_bounds(0), Err(PolytopeError::Empty));
    }

    #[test]
    fn normalize_examples() {
        let p = HPolytope::new(dmatrix![2.0], dvector![4.0]).unwrap();
        let n = p.normalize().unwrap();
        assert_eq!(n.rows()[(0, 0)], 0.5);
        assert_eq!(n.rhs()[0], 1.0);
        // |u| <= 1 is already normalized
        let u = unit_box(1);
        assert_eq!(u.normalize().unwrap(), u);
        // x <= 0 has the origin on the boundary
        let bad = HPolytope::new(dmatrix![1.0], dvector![0.0]).unwrap();
        assert!(matches!(
            bad.normalize(),
            Err(PolytopeError::OriginNotInterior(_))
        ));
    }

    #[test]
    fn normalize_preserves_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rows = DMatrix::from_fn(8, 3, |_, _| rng.gen_range(-1.0..1.0));
        let rhs = DVector::from_fn(8, |_, _| rng.gen_range(0.5..3.0));
        let p = HPolytope::new(rows, rhs).unwrap();
        let n = p.normalize().unwrap();
        for _ in 0..10_000 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-4.0..4.0));
            assert_eq!(
                p.contains(&x, 0.0).unwrap(),
                n.contains(&x, 0.0).unwrap(),
                "membership changed at {x:?}"
            );
        }
    }

    #[test]
    fn redundant_row_does_not_change_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = unit_box(2);
        // candidate: random supporting-ish row pushed outward
        for _ in 0..20 {
            let dir = DVector::from_fn(2, |_, _| rng.gen_range(-1.0_f64..1.0));
            if dir.norm() < 0.1 {
                continue;
            }
            let rhs_c = dir.amax() * 2.0 + 1.0; // beyond the box support
            assert!(p.is_redundant(&dir, rhs_c).unwrap());
            let mut rows2 = DMatrix::zeros(p.len() + 1, 2);
            rows2.rows_mut(0, p.len()).copy_from(p.rows());
            rows2.row_mut(p.len()).copy_from(&dir.transpose());
            let mut rhs2 = DVector::zeros(p.len() + 1);
            rhs2.rows_mut(0, p.len()).copy_from(p.rhs());
            rhs2[p.len()] = rhs_c;
            let q = HPolytope::new(rows2, rhs2).unwrap();
            for _ in 0..500 {
                let x = DVector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
                assert_eq!(p.contains(&x, 0.0).unwrap(), q.contains(&x, 0.0).unwrap());
            }
        }
    }

    #[test]
    fn bounds_bracket_sampled_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rows = DMatrix::from_fn(10, 2, |_, _| rng.gen_range(-1.0..1.0));
        let rhs = DVector::from_fn(10, |_, _| rng.gen_range(1.0..2.0));
        let mut p_rows = DMatrix::zeros(14, 2);
        p_rows.rows_mut(0, 10).copy_from(&rows);
        p_rows[(10, 0)] = 1.0;
        p_rows[(11, 0)] = -1.0;
        p_rows[(12, 1)] = 1.0;
        p_rows[(13, 1)] = -1.0;
        let mut p_rhs = DVector::from_element(14, 5.0);
        p_rhs.rows_mut(0, 10).copy_from(&rhs);
        let p = HPolytope::new(p_rows, p_rhs).unwrap();
        let (lo, hi) = p.coordinate_bounds(0).unwrap();
        for _ in 0..2000 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-5.0..5.0));
            if p.contains(&x, 0.0).unwrap() {
                assert!(x[0] >= lo - 1e-9 && x[0] <= hi + 1e-9);
            }
        }
    }

    #[test]
    fn pruning_keeps_one_of_identical_rows() {
        let p = HPolytope::new(dmatrix![1.0; 1.0; -1.0], dvector![1.0, 1.0, 1.0]).unwrap();
        let q = p.pruned().unwrap();
        assert_eq!(q.len(), 2);
        assert!(q.contains(&dvector![1.0], 0.0).unwrap());
        assert!(!q.contains(&dvector![1.0 + 1e-6], 0.0).unwrap());
        assert!(!q.contains(&dvector![-1.0 - 1e-6], 0.0).unwrap());
    }
}
