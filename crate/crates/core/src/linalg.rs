//! Gaussian draws parameterized by a precision matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Draw from `N(P⁻¹ b, P⁻¹)` given the precision `P` and `b`.
///
/// With `P = L L'`, the mean solves `L L' μ = b` and the draw is
/// `μ + L'⁻¹ ε`, so no inverse is formed.
pub fn sample_mvn_precision<R: Rng + ?Sized>(
    precision: DMatrix<f64>,
    rhs: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let dim = precision.nrows();
    if dim == 0 {
        return Ok(DVector::zeros(0));
    }
    let chol = precision
        .cholesky()
        .ok_or_else(|| Error::Numerical("precision matrix is not positive definite".into()))?;
    let mean = chol.solve(rhs);
    let eps = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let offset = chol
        .l()
        .transpose()
        .solve_upper_triangular(&eps)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let draw = mean + offset;
    if draw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite Gaussian draw".into()));
    }
    Ok(draw)
}

/// Mean `P⁻¹ b` of the same Gaussian.
pub fn precision_mean(precision: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = precision
        .cholesky()
        .ok_or_else(|| Error::Numerical("precision matrix is not positive definite".into()))?;
    Ok(chol.solve(rhs))
}
