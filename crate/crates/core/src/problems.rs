//! Test-problem generators.

use std::collections::HashSet;
use std::f64::consts::PI;

use thiserror::Error;

use crate::sparse::{SparseMatrixCsr, TripletList};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ProblemError {
    #[error("grid size must be >= 1")]
    EmptyGrid,

    #[error("dimension must be >= 1")]
    EmptyMatrix,

    #[error("stencil offset {0} appears more than once")]
    DuplicateOffset(i64),

    #[error("stencil offset {offset} is out of range for n = {n}")]
    OffsetOutOfRange { offset: i64, n: usize },
}

/// Convection-diffusion operator `-(u_xx + u_yy + u_zz) - c u_x` on the unit
/// cube, `nx` interior points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pde1Spec {
    pub nx: usize,
    pub c: f64,
}

impl Pde1Spec {
    pub fn new(nx: usize) -> Self {
        Self { nx, c: 1000.0 }
    }
}

/// 7-point central-difference discretization with homogeneous Dirichlet
/// boundaries, `h = 1/(nx+1)`, unknowns ordered lexicographically with `x`
/// fastest.
///
/// Rows carry `6/h^2` on the diagonal, `-1/h^2 - c/(2h)` on the `+x`
/// neighbour, `-1/h^2 + c/(2h)` on the `-x` neighbour and `-1/h^2` on the
/// `y`/`z` neighbours. The right-hand side samples
/// `F = exp(xyz) sin(pi x) sin(pi y) sin(pi z)` at the grid points.
pub fn gen_pde1(spec: &Pde1Spec) -> Result<(SparseMatrixCsr, Vec<f64>), ProblemError> {
    let nx = spec.nx;
    if nx == 0 {
        return Err(ProblemError::EmptyGrid);
    }
    let n = nx * nx * nx;
    let h = 1.0 / (nx as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    let conv = spec.c / (2.0 * h);
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + nx * k);

    let mut t = TripletList::with_capacity(n, 7 * n);
    let mut b = vec![0.0; n];
    for k in 0..nx {
        for j in 0..nx {
            for i in 0..nx {
                let row = idx(i, j, k);
                if k > 0 {
                    t.push(row, idx(i, j, k - 1), -inv_h2);
                }
                if j > 0 {
                    t.push(row, idx(i, j - 1, k), -inv_h2);
                }
                if i > 0 {
                    t.push(row, idx(i - 1, j, k), -inv_h2 + conv);
                }
                t.push(row, row, 6.0 * inv_h2);
                if i + 1 < nx {
                    t.push(row, idx(i + 1, j, k), -inv_h2 - conv);
                }
                if j + 1 < nx {
                    t.push(row, idx(i, j + 1, k), -inv_h2);
                }
                if k + 1 < nx {
                    t.push(row, idx(i, j, k + 1), -inv_h2);
                }

                let (x, y, z) = ((i + 1) as f64 * h, (j + 1) as f64 * h, (k + 1) as f64 * h);
                b[row] = (x * y * z).exp() * (PI * x).sin() * (PI * y).sin() * (PI * z).sin();
            }
        }
    }
    let a = SparseMatrixCsr::from_triplets(&t).expect("stencil indices are in range");
    Ok((a, b))
}

/// Banded Toeplitz matrix: `A[i, i + offset] = value` for every stencil entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    pub n: usize,
    pub stencil: Vec<(i64, f64)>,
}

pub fn gen_toeplitz(spec: &ToeplitzSpec) -> Result<SparseMatrixCsr, ProblemError> {
    let n = spec.n;
    if n == 0 {
        return Err(ProblemError::EmptyMatrix);
    }
    let mut seen = HashSet::new();
    for &(offset, _) in &spec.stencil {
        if !seen.insert(offset) {
            return Err(ProblemError::DuplicateOffset(offset));
        }
        if offset.unsigned_abs() as usize >= n {
            return Err(ProblemError::OffsetOutOfRange { offset, n });
        }
    }

    let mut t = TripletList::with_capacity(n, n * spec.stencil.len());
    for i in 0..n {
        for &(offset, value) in &spec.stencil {
            let col = i as i64 + offset;
            if (0..n as i64).contains(&col) {
                t.push(i, col as usize, value);
            }
        }
    }
    Ok(SparseMatrixCsr::from_triplets(&t).expect("columns are in range"))
}

/// `b = A 1`, so that the exact solution is the all-ones vector.
pub fn rhs_all_ones(a: &SparseMatrixCsr) -> Vec<f64> {
    a.matvec(&vec![1.0; a.n()])
        .expect("length matches by construction")
}
