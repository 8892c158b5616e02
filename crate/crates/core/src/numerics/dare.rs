//! State-feedback synthesis through the discrete algebraic Riccati equation,
//! solved by fixed-point iteration of the Riccati recursion.

use nalgebra::DMatrix;
use thiserror::Error;

use super::spectral::{spectral_radius, SpectralError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DareError {
    #[error("Riccati iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("R + B'PB became singular")]
    SingularInnerTerm,
    #[error("dimension mismatch between A ({a_rows}x{a_cols}), B ({b_rows}x{b_cols}), Q, R")]
    DimensionMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Iterate `P <- A'PA - A'PB (R + B'PB)^-1 B'PA + Q` to a fixed point and
/// return the stabilizing gain `K = -(R + B'PB)^-1 B'PA`, so that the closed
/// loop is `A + B K`. Fails if the closed loop is not strictly stable.
pub fn solve_dare(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>, DareError> {
    let n = a.nrows();
    let p_in = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (p_in, p_in) {
        return Err(DareError::DimensionMismatch {
            a_rows: a.nrows(),
            a_cols: a.ncols(),
            b_rows: b.nrows(),
            b_cols: b.ncols(),
        });
    }
    let at = a.transpose();
    let bt = b.transpose();
    let mut p = q.clone();
    let mut converged = false;
    for _ in 0..max_iter {
        let btpb = r + &bt * &p * b;
        let inner = btpb
            .try_inverse()
            .ok_or(DareError::SingularInnerTerm)?;
        let next = &at * &p * a - &at * &p * b * &inner * &bt * &p * a + q;
        let diff = (&next - &p).abs().max();
        p = next;
        if diff <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DareError::NoConvergence(max_iter));
    }
    let inner = (r + &bt * &p * b)
        .try_inverse()
        .ok_or(DareError::SingularInnerTerm)?;
    let k = -(&inner * &bt * &p * a);
    let closed = a + b * &k;
    if spectral_radius(&closed)? >= 1.0 {
        return Err(DareError::NoConvergence(max_iter));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn already_stable_scalar_shrinks() {
        let k = solve_dare(
            &dmatrix![0.5],
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            1e-12,
            10_000,
        )
        .unwrap();
        let closed = 0.5 + k[(0, 0)];
        assert!(closed.abs() < 0.5);
    }

    #[test]
    fn scalar_integrator_golden_ratio_gain() {
        // fixed point of p = 1 + p/(1+p) is the golden ratio; k = -p/(1+p)
        let k = solve_dare(
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            1e-13,
            100_000,
        )
        .unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let expected = -phi / (1.0 + phi);
        assert!(
            (k[(0, 0)] - expected).abs() < 1e-9,
            "k = {}, expected {}",
            k[(0, 0)],
            expected
        );
    }

    #[test]
    fn unstabilizable_pair_errors() {
        // B = 0 and A unstable: no K can stabilize
        let err = solve_dare(
            &dmatrix![2.0],
            &dmatrix![0.0],
            &dmatrix![1.0],
            &dmatrix![1.0],
            1e-10,
            500,
        )
        .unwrap_err();
        assert!(matches!(err, DareError::NoConvergence(_)));
    }
}
