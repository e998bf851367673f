use ndarray::Array2;

use crate::error::{Error, Result};

/// Row-major dense matrix of 64-bit reals.
pub type DenseMatrix = Array2<f64>;

/// Fails with a numerical error if any entry is NaN or infinite.
pub fn ensure_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos / m.ncols().max(1), pos % m.ncols().max(1));
        return Err(Error::Numerical(format!(
            "non-finite value in {what} at ({r}, {c})"
        )));
    }
    Ok(())
}

/// Dense product with a shape check.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::shape(
            "matmul",
            format!("{}x{} times {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols()),
        ));
    }
    Ok(a.dot(b))
}
