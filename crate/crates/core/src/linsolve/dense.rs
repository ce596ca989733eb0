//! Dense eigen/singular value kernels for small diagnostic problems, backed
//! by `nalgebra`'s QR-based SVD and symmetric eigensolver.

use crate::error::{invalid, Error, Result};
use crate::C64;
use nalgebra::DMatrix;

/// Largest dimension accepted by the dense diagnostics.
pub const DENSE_CAP: usize = 2000;

fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::Resource(format!("dense problem of size {n} exceeds cap {DENSE_CAP}")));
    }
    Ok(())
}

/// Smallest singular value of a square complex matrix.
pub fn dense_min_singular_value(m: &DMatrix<C64>) -> Result<f64> {
    check_cap(m.nrows().max(m.ncols()))?;
    if m.is_empty() {
        return Err(invalid("empty matrix"));
    }
    let svd = m.clone().svd(false, false);
    Ok(svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Extreme eigenvalues of the symmetric-definite pencil `A x = λ B x`.
pub fn dense_sym_generalized_eigs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let n = a.nrows();
    check_cap(n)?;
    if a.shape() != (n, n) || b.shape() != (n, n) || n == 0 {
        return Err(invalid("generalized eigenproblem needs two square matrices of equal size"));
    }
    let chol = b.clone().cholesky().ok_or(Error::NotSpd { pivot: 0, size: n })?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let y = l
        .solve_lower_triangular(a)
        .ok_or(Error::Singular { pivot: 0, size: n })?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::Singular { pivot: 0, size: n })?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Extreme eigenvalues of a real symmetric matrix.
pub fn dense_sym_eigs(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    check_cap(a.nrows())?;
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}
