//! Truncated Fock-space linear algebra.
//!
//! Every slot is `l_2(N)` cut at occupation `cap`; the shift on a slot sends
//! `e_n` to `e_{n+1}` for `n < cap` and kills `e_cap`. Relations among words of
//! length `k` are then exact on vectors with all occupations `<= cap - k`,
//! which is what [`core_residual`] measures.

mod basis;
mod linalg;
mod operator;

pub use basis::{capacity_limit, enumerate_basis, FockBasis, MultiIndex, DEFAULT_MAX_DIM, MAX_DIM_ENV};
pub use linalg::{
    core_norm, core_residual, hermitian_eigh, matrix_norm, operator_norm, polar_left, psd_sqrt, PolarPair,
    DEFAULT_RANK_TOL, EIGEN_CLAMP, HERMITIAN_TOL, PSD_TOL,
};
pub use operator::LinearOperator;
