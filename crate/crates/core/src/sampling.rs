//! Seeded random matrices and random elements of operator systems.
//!
//! Every sampler takes an explicit RNG; the same seed reproduces the same
//! draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{min_eigenvalue, ComplexMatrix, Tolerance, C64, ONE};
use crate::opsys::ConcreteOperatorSystem;

pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a run seeded by `seed`.
pub fn derived_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian entries with unit variance.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(gaussian(rng) * s, gaussian(rng) * s)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    gaussian_matrix(n, n, rng).hermitian_part()
}

/// `G G* / n` for Gaussian `G`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    (&g * &g.adjoint()).hermitian_part().scale_real(1.0 / n.max(1) as f64)
}

/// Product of `n` random Householder reflections.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(n);
    for _ in 0..n {
        let v = gaussian_matrix(n, 1, rng);
        let norm2 = v.frobenius_norm().powi(2);
        if norm2 == 0.0 {
            continue;
        }
        let mut h = ComplexMatrix::identity(n);
        h.add_scaled(C64::new(-2.0 / norm2, 0.0), &(&v * &v.adjoint()));
        u = &u * &h;
    }
    u
}

/// Random Hermitian element of `M_n(S)`: a Gaussian Hermitian matrix
/// projected blockwise onto the system.
pub fn random_hermitian_element<R: Rng + ?Sized>(
    system: &ConcreteOperatorSystem,
    n: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let size = n * system.ambient_dim();
    let h = random_hermitian(size, rng);
    Ok(system.project_level(n, &h)?.hermitian_part())
}

/// Random positive element of `M_n(S)`.
///
/// `G G*` is projected onto `M_n(S)`. If the projection moved it by more than
/// `tol` the projected matrix is shifted by a multiple of the unit so that its
/// smallest eigenvalue is zero, plus a random interior offset half of the time.
pub fn random_positive_element<R: Rng + ?Sized>(
    system: &ConcreteOperatorSystem,
    n: usize,
    rng: &mut R,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    let size = n * system.ambient_dim();
    let x = random_psd(size, rng);
    let p = system.project_level(n, &x)?.hermitian_part();
    if (&x - &p).frobenius_norm() <= tol.eps() {
        return Ok(p);
    }
    let lam = min_eigenvalue(&p, tol)?;
    let interior = if rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(0.0..0.5)
    };
    let mut out = p;
    out.add_scaled(ONE * ((-lam).max(0.0) + interior), &system.unit(n));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;

    #[test]
    fn same_seed_same_draws() {
        let a = gaussian_matrix(3, 3, &mut seeded_rng(9));
        let b = gaussian_matrix(3, 3, &mut seeded_rng(9));
        assert_eq!(a, b);
        let c = gaussian_matrix(3, 3, &mut derived_rng(9, 0));
        let d = gaussian_matrix(3, 3, &mut derived_rng(9, 1));
        assert_ne!(c, d);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(5, &mut seeded_rng(1));
        let p = &u * &u.adjoint();
        assert!(p.approx_eq(&ComplexMatrix::identity(5), 1e-12));
    }

    #[test]
    fn positive_elements_are_positive_members() {
        let tol = Tolerance::default();
        let mut rng = seeded_rng(2);
        for sys in [
            ConcreteOperatorSystem::full(2),
            ConcreteOperatorSystem::diagonal2(),
            ConcreteOperatorSystem::scalars(),
        ] {
            for n in 1..=3 {
                for _ in 0..20 {
                    let x = random_positive_element(&sys, n, &mut rng, tol).unwrap();
                    assert!(sys.contains(n, &x, tol).unwrap().inside);
                    assert!(is_psd(&x, tol).unwrap());
                }
            }
        }
    }
}
