//! Dense linear-algebra and small optimization kernels shared by the rest of
//! the crate: a simplex LP solver, an exact 2-D norm-minimizing projection,
//! eigenvalue/stability classification and a fixed-point DARE solver.
//!
//! Everything here works on `nalgebra` dense matrices with `f64` entries and
//! is pure: no globals, no interior mutability.

mod dare;
mod lp;
mod qp2d;
mod spectral;

pub use dare::{solve_dare, DareError};
pub use lp::{solve_lp, LpError, LpOutcome, LpProblem};
pub use qp2d::{min_norm_point_2d, Qp2dError};
pub use spectral::{
    eigenvalues, is_lyapunov_stable, is_schur, nullspace_vector, rank, rank_complex,
    spectral_radius, SpectralError,
};
