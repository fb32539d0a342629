//! Cyclic Jacobi eigen-solver for Hermitian matrices.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::Tolerance;
use crate::error::{Error, Result};

/// Default sweep limit for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `H = V diag(values) V*`, values nondecreasing.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

/// Checks Hermitianity within `tol` and returns the symmetrized matrix.
pub fn symmetrized(h: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    h.square_dim()?;
    let deviation = h.hermitian_deviation();
    if deviation > tol.eps() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(h.hermitian_part())
}

pub fn hermitian_eigen(h: &ComplexMatrix, tol: Tolerance) -> Result<HermitianEigen> {
    let (values, vectors) = jacobi(h, tol, MAX_SWEEPS, true)?;
    Ok(HermitianEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues in nondecreasing order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix, tol: Tolerance) -> Result<Vec<f64>> {
    jacobi(h, tol, MAX_SWEEPS, false).map(|(values, _)| values)
}

/// Same as [`hermitian_eigenvalues`] with an explicit sweep limit.
pub fn hermitian_eigenvalues_with_limit(
    h: &ComplexMatrix,
    tol: Tolerance,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    jacobi(h, tol, max_sweeps, false).map(|(values, _)| values)
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(
    h: &ComplexMatrix,
    tol: Tolerance,
    max_sweeps: usize,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let sym = symmetrized(h, tol)?;
    let n = sym.rows();
    let mut a: Vec<C64> = sym.as_slice().to_vec();
    let mut v: Option<Vec<C64>> = want_vectors.then(|| {
        let mut id = vec![ZERO; n * n];
        for i in 0..n {
            id[i * n + i] = ONE;
        }
        id
    });

    // The floor keeps the iteration finite when eps is zero or below roundoff.
    let stop = tol.eps().max(4.0 * f64::EPSILON * sym.frobenius_norm());
    let mut sweeps = 0;
    while off_diagonal_norm(&a, n) > stop {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, v.as_deref_mut(), n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]));
    Ok((values, vectors))
}

/// One complex Jacobi rotation annihilating entry `(p, q)`.
fn rotate(a: &mut [C64], v: Option<&mut [C64]>, n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    if mag == 0.0 || mag <= 1e-300 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase_conj = (apq / mag).conj();
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q).
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase_conj * (-s);
    let jqq = phase_conj * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * jpp + akq * jqp;
        a[k * n + q] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
        a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(app - t * mag, 0.0);
    a[q * n + q] = C64::new(aqq + t * mag, 0.0);

    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[k * n + p];
            let vkq = v[k * n + q];
            v[k * n + p] = vkp * jpp + vkq * jqp;
            v[k * n + q] = vkp * jpq + vkq * jqq;
        }
    }
}
