//! Square sparse matrices in compressed-sparse-row form, dense vector kernels
//! and Matrix Market coordinate I/O.

mod csr;
pub mod mm;
mod vector;

pub use csr::{SparseMatrixCsr, TripletList};
pub use vector::{axpy, axpy_in_place, dot, norm2, scale_in_place};

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry ({row}, {col}) is outside a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<(), SparseError> {
    if expected != found {
        return Err(SparseError::DimensionMismatch { expected, found });
    }
    Ok(())
}
