//! Dense complex linear algebra: Hermitian spectra, PSD tests, Kronecker
//! products and congruences.

mod eigen;
mod matrix;

pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, hermitian_eigenvalues_with_limit, symmetrized,
    HermitianEigen, MAX_SWEEPS,
};
pub use matrix::{ComplexMatrix, C64, ONE, ZERO};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute threshold on eigenvalues and residuals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(Self(eps))
        } else {
            Err(Error::InvalidTolerance)
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    /// The same tolerance multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self(self.0 * factor)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT_EPS)
    }
}

impl TryFrom<f64> for Tolerance {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Tolerance> for f64 {
    fn from(t: Tolerance) -> f64 {
        t.0
    }
}

pub fn min_eigenvalue(h: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    Ok(hermitian_eigenvalues(h, tol)?.first().copied().unwrap_or(0.0))
}

/// True iff the smallest eigenvalue is at least `-eps`.
pub fn is_psd(h: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    Ok(min_eigenvalue(h, tol)? >= -tol.eps())
}

/// Kronecker product: entry `(i*rows(b)+k, j*cols(b)+l)` is `a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// `alpha * x * alpha^*`.
pub fn congruence(alpha: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = x.square_dim()?;
    if alpha.cols() != m {
        return Err(Error::DimensionMismatch {
            context: "congruence",
            expected: m,
            found: alpha.cols(),
        });
    }
    alpha.matmul(x)?.matmul(&alpha.adjoint())
}

/// A factor `F` with `F F* = H_+`, where `H_+` clips the negative spectrum of
/// the Hermitian matrix `h`. Columns with zero weight are dropped.
pub fn psd_factor(h: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    let e = hermitian_eigen(h, tol)?;
    let n = e.values.len();
    let keep: Vec<usize> = (0..n).filter(|&k| e.values[k] > 0.0).collect();
    Ok(ComplexMatrix::from_fn(n, keep.len(), |i, c| {
        let k = keep[c];
        e.vectors[(i, k)] * e.values[k].sqrt()
    }))
}

/// Projection of a Hermitian matrix onto the PSD cone (negative eigenvalues clipped).
pub fn psd_projection(h: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    let f = psd_factor(h, tol)?;
    Ok(&f * &f.adjoint())
}
