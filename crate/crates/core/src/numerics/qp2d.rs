//! Exact norm-minimizing projection onto a 2-D polygon `{x : G x <= g}`.
//!
//! The reference state lives in the plane, so the only quadratic program the
//! crate needs is 2-D. The minimizer is found exactly without an iterative QP
//! solver: if the center is feasible it is its own projection, otherwise the
//! projection lies either in the relative interior of a facet whose halfspace
//! the center violates, or on a vertex. Enumerating those finitely many
//! candidates and keeping the closest feasible one is exact.

use nalgebra::{DMatrix, DVector, Vector2};
use thiserror::Error;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Qp2dError {
    #[error("polygon is empty: no feasible point")]
    Infeasible,
    #[error("constraints must have 2 columns, got {0}")]
    DimensionMismatch(usize),
}

/// Minimize `||x - center||^2` over `{x in R^2 : rows * x <= rhs}`.
pub fn min_norm_point_2d(
    center: &Vector2<f64>,
    rows: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<Vector2<f64>, Qp2dError> {
    if rows.ncols() != 2 {
        return Err(Qp2dError::DimensionMismatch(rows.ncols()));
    }
    let m = rows.nrows();
    let feasible = |p: &Vector2<f64>| -> bool {
        (0..m).all(|r| rows[(r, 0)] * p.x + rows[(r, 1)] * p.y <= rhs[r] + FEAS_TOL)
    };
    let violation = |r: usize, p: &Vector2<f64>| rows[(r, 0)] * p.x + rows[(r, 1)] * p.y - rhs[r];

    if (0..m).all(|r| violation(r, center) <= 0.0) {
        return Ok(*center);
    }

    let mut best: Option<(f64, Vector2<f64>)> = None;
    let mut consider = |p: Vector2<f64>| {
        let d = (p - center).norm_squared();
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, p));
        }
    };

    // orthogonal projections onto hyperplanes of violated rows
    for r in 0..m {
        let v = violation(r, center);
        if v <= 0.0 {
            continue;
        }
        let n = Vector2::new(rows[(r, 0)], rows[(r, 1)]);
        let nn = n.norm_squared();
        if nn < 1e-24 {
            continue;
        }
        let p = center - n * (v / nn);
        if feasible(&p) {
            consider(p);
        }
    }

    // vertices: pairwise hyperplane intersections
    for i in 0..m {
        let ni = Vector2::new(rows[(i, 0)], rows[(i, 1)]);
        for j in (i + 1)..m {
            let nj = Vector2::new(rows[(j, 0)], rows[(j, 1)]);
            let det = ni.x * nj.y - ni.y * nj.x;
            if det.abs() <= 1e-12 * ni.norm() * nj.norm() {
                continue;
            }
            let p = Vector2::new(
                (rhs[i] * nj.y - rhs[j] * ni.y) / det,
                (rhs[j] * ni.x - rhs[i] * nj.x) / det,
            );
            if feasible(&p) {
                consider(p);
            }
        }
    }

    best.map(|(_, p)| p).ok_or(Qp2dError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn facet_projection() {
        // region x >= 1, center at origin -> (1, 0)
        let z = min_norm_point_2d(
            &Vector2::new(0.0, 0.0),
            &dmatrix![-1.0, 0.0],
            &dvector![-1.0],
        )
        .unwrap();
        assert!((z - Vector2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn feasible_center_is_fixed_point() {
        let rows = dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0];
        let rhs = dvector![1.0, 1.0, 1.0, 1.0];
        let c = Vector2::new(0.3, -0.7);
        assert_eq!(min_norm_point_2d(&c, &rows, &rhs).unwrap(), c);
    }

    #[test]
    fn vertex_of_unit_box() {
        let rows = dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0];
        let rhs = dvector![1.0, 1.0, 1.0, 1.0];
        let z = min_norm_point_2d(&Vector2::new(2.0, 2.0), &rows, &rhs).unwrap();
        assert!((z - Vector2::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn empty_region_reports_infeasible() {
        let rows = dmatrix![1.0, 0.0; -1.0, 0.0];
        let rhs = dvector![-1.0, -1.0]; // x <= -1 and x >= 1
        assert_eq!(
            min_norm_point_2d(&Vector2::zeros(), &rows, &rhs),
            Err(Qp2dError::Infeasible)
        );
    }

    #[test]
    fn beats_random_feasible_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = rng.gen_range(3..10);
            let mut rows = DMatrix::zeros(m + 4, 2);
            let mut rhs = DVector::zeros(m + 4);
            for r in 0..m {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                rows[(r, 0)] = th.cos();
                rows[(r, 1)] = th.sin();
                rhs[r] = rng.gen_range(1.0..2.0); // unit ball always inside
            }
            for (k, (gx, gy)) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                .iter()
                .enumerate()
            {
                rows[(m + k, 0)] = *gx;
                rows[(m + k, 1)] = *gy;
                rhs[m + k] = 3.0;
            }
            let center = Vector2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let z = min_norm_point_2d(&center, &rows, &rhs).unwrap();
            // rejection-sample feasible points; none may be closer
            let mut feasible_seen = 0;
            let mut draws = 0;
            while feasible_seen < 10_000 && draws < 1_000_000 {
                draws += 1;
                let s = Vector2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let ok = (0..rows.nrows())
                    .all(|r| rows[(r, 0)] * s.x + rows[(r, 1)] * s.y <= rhs[r]);
                if ok {
                    feasible_seen += 1;
                    assert!(
                        (z - center).norm() <= (s - center).norm() + 1e-9,
                        "sample closer than projection"
                    );
                }
            }
            assert!(feasible_seen >= 10_000, "sampler starved");
        }
    }
}
