use super::{check_len, SparseError};

/// Inner product with plain left-to-right accumulation in `f64`.
pub fn dot(x: &[f64], y: &[f64]) -> Result<f64, SparseError> {
    check_len(x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
    }
    acc
}

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    dot_unchecked(x, x).sqrt()
}

/// Returns `a * x + y`.
pub fn axpy(a: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>, SparseError> {
    let mut out = y.to_vec();
    axpy_in_place(a, x, &mut out)?;
    Ok(out)
}

/// `y <- a * x + y`.
pub fn axpy_in_place(a: f64, x: &[f64], y: &mut [f64]) -> Result<(), SparseError> {
    check_len(y.len(), x.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
    Ok(())
}

pub fn scale_in_place(a: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}
