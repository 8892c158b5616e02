//! Eigenvalue-based classification: spectral radius, Schur stability,
//! Lyapunov stability with geometric-multiplicity checking, numerical rank
//! and nullspace extraction.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

/// Tolerance and sweep cap for the QR/Schur eigenvalue iteration.
const EIG_TOL: f64 = 1e-10;
const EIG_MAX_SWEEPS: usize = 500;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
}

/// All eigenvalues of a real square matrix via the Schur decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare(m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(EIG_TOL, EIG_MAX_SWEEPS * m.nrows())
        .ok_or(SpectralError::NoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max))
}

/// All eigenvalue moduli strictly below `1 - margin`.
pub fn is_schur(m: &DMatrix<f64>, margin: f64) -> Result<bool, SpectralError> {
    Ok(spectral_radius(m)? < 1.0 - margin)
}

/// Numerical rank via singular values (threshold relative to the largest).
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Rank of a complex matrix through its real 2n x 2m embedding
/// [[Re, -Im], [Im, Re]], whose rank is exactly twice the complex rank.
pub fn rank_complex(m: &DMatrix<Complex<f64>>, tol: f64) -> usize {
    let (r, c) = m.shape();
    let mut e = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let v = m[(i, j)];
            e[(i, j)] = v.re;
            e[(i, j + c)] = -v.im;
            e[(i + r, j)] = v.im;
            e[(i + r, j + c)] = v.re;
        }
    }
    rank(&e, tol) / 2
}

/// Lyapunov stability: every eigenvalue modulus at most `1 + tol`, and every
/// eigenvalue on the unit circle has full geometric multiplicity (checked via
/// the rank of `M - lambda I`).
pub fn is_lyapunov_stable(m: &DMatrix<f64>, tol: f64) -> Result<bool, SpectralError> {
    let eigs = eigenvalues(m)?;
    let n = m.nrows();
    if eigs.iter().any(|l| l.norm() > 1.0 + tol) {
        return Ok(false);
    }
    // cluster unit-circle eigenvalues and compare algebraic vs geometric multiplicity
    let mut boundary: Vec<Complex<f64>> = eigs
        .iter()
        .copied()
        .filter(|l| (l.norm() - 1.0).abs() <= tol)
        .collect();
    while let Some(lambda) = boundary.first().copied() {
        let cluster_tol = 1e-6;
        let algebraic = boundary
            .iter()
            .filter(|l| (**l - lambda).norm() <= cluster_tol)
            .count();
        boundary.retain(|l| (*l - lambda).norm() > cluster_tol);
        let shifted = m.map(|v| Complex::new(v, 0.0))
            - DMatrix::<Complex<f64>>::identity(n, n) * lambda;
        let geometric = n - rank_complex(&shifted, 1e-9);
        if geometric < algebraic {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unit-norm vector `v` with `||M v|| <= tol * ||M||`, or `None` if the
/// smallest singular direction exceeds the tolerance. The sign convention
/// (first nonzero component positive) makes the result deterministic.
pub fn nullspace_vector(m: &DMatrix<f64>, tol: f64) -> Option<DVector<f64>> {
    let cols = m.ncols();
    if m.nrows() < cols {
        // pad with zero rows; the nullspace is unchanged and v_t becomes full
        let mut padded = DMatrix::zeros(cols, cols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        return nullspace_vector(&padded, tol);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        // zero matrix: any unit vector is in the nullspace
        let mut e = DVector::zeros(cols);
        e[0] = 1.0;
        return Some(e);
    }
    let (idx, smin) = sv
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    if smin > tol * smax {
        return None;
    }
    let mut v = DVector::from_iterator(cols, v_t.row(idx).iter().copied());
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v = -v;
        }
    }
    let n = v.norm();
    Some(v / n)
}
