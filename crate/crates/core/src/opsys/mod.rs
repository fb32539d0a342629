//! Concrete operator systems, their matrix cones, and Archimedeanization of
//! abstract cone oracles over a finite ladder of shifts.

mod system;

pub use system::{ConcreteOperatorSystem, Membership};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeStatus {
    Positive,
    NotPositive,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    /// Min eigenvalue or residual backing the verdict.
    pub witness: Option<f64>,
    pub detail: String,
}

impl ConeVerdict {
    pub fn is_positive(&self) -> bool {
        self.status == ConeStatus::Positive
    }
}

/// Descending list of strictly positive shifts standing in for "every ε > 0".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Ladder(Vec<f64>);

impl Ladder {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyLadder);
        }
        let finite_positive = values.iter().all(|v| v.is_finite() && *v > 0.0);
        let descending = values.windows(2).all(|w| w[0] > w[1]);
        if !finite_positive || !descending {
            return Err(Error::InvalidLadder);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn smallest(&self) -> f64 {
        *self.0.last().expect("nonempty ladder")
    }

    pub fn largest(&self) -> f64 {
        self.0[0]
    }
}

impl Default for Ladder {
    fn default() -> Self {
        Self(vec![1e-3, 1e-6, 1e-9])
    }
}

impl TryFrom<Vec<f64>> for Ladder {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Ladder> for Vec<f64> {
    fn from(l: Ladder) -> Vec<f64> {
        l.0
    }
}

/// A matrix-ordered cone given procedurally, level by level.
pub trait ConeOracle {
    /// Order unit at level 1.
    fn unit(&self) -> &ComplexMatrix;

    fn test(&self, level: usize, element: &ComplexMatrix) -> Result<ConeVerdict>;

    /// `I_n ⊗ unit`.
    fn unit_at(&self, level: usize) -> ComplexMatrix {
        kron(&ComplexMatrix::identity(level), self.unit())
    }
}

impl<O: ConeOracle + ?Sized> ConeOracle for &O {
    fn unit(&self) -> &ComplexMatrix {
        (**self).unit()
    }

    fn test(&self, level: usize, element: &ComplexMatrix) -> Result<ConeVerdict> {
        (**self).test(level, element)
    }
}

/// The positivity cones of a concrete system.
pub struct SystemCone<'a> {
    system: &'a ConcreteOperatorSystem,
    unit: ComplexMatrix,
    tol: Tolerance,
}

impl<'a> SystemCone<'a> {
    pub fn new(system: &'a ConcreteOperatorSystem, tol: Tolerance) -> Self {
        Self {
            system,
            unit: system.unit(1),
            tol,
        }
    }
}

impl ConeOracle for SystemCone<'_> {
    fn unit(&self) -> &ComplexMatrix {
        &self.unit
    }

    fn test(&self, level: usize, element: &ComplexMatrix) -> Result<ConeVerdict> {
        self.system.is_positive(level, element, self.tol)
    }
}

type LevelTester = dyn Fn(usize, &ComplexMatrix) -> Result<ConeVerdict> + Send + Sync;

/// A cone defined by an arbitrary level tester.
pub struct FnCone {
    unit: ComplexMatrix,
    tester: Box<LevelTester>,
}

impl FnCone {
    pub fn new(
        unit: ComplexMatrix,
        tester: impl Fn(usize, &ComplexMatrix) -> Result<ConeVerdict> + Send + Sync + 'static,
    ) -> Self {
        Self {
            unit,
            tester: Box::new(tester),
        }
    }
}

impl ConeOracle for FnCone {
    fn unit(&self) -> &ComplexMatrix {
        &self.unit
    }

    fn test(&self, level: usize, element: &ComplexMatrix) -> Result<ConeVerdict> {
        (self.tester)(level, element)
    }
}

/// Cone of `u` such that `ε·1_n + u` lies in the base cone for every ladder ε.
pub struct Archimedeanized<O> {
    base: O,
    ladder: Ladder,
}

/// Wraps `oracle` so that it accepts `u` whenever `ε·1 + u` passes for the
/// smallest ladder shift. Passing only at larger shifts yields `Unknown`.
pub fn archimedeanize<O: ConeOracle>(oracle: O, ladder: &[f64]) -> Result<Archimedeanized<O>> {
    Ok(Archimedeanized {
        base: oracle,
        ladder: Ladder::new(ladder.to_vec())?,
    })
}

impl<O: ConeOracle> Archimedeanized<O> {
    pub fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    pub fn base(&self) -> &O {
        &self.base
    }
}

impl<O: ConeOracle> ConeOracle for Archimedeanized<O> {
    fn unit(&self) -> &ComplexMatrix {
        self.base.unit()
    }

    fn test(&self, level: usize, element: &ComplexMatrix) -> Result<ConeVerdict> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let unit = self.base.unit_at(level);
        let mut passed_at = None;
        for &eps in self.ladder.values() {
            let mut shifted = element.clone();
            shifted.add_scaled(crate::linalg::C64::new(eps, 0.0), &unit);
            if self.base.test(level, &shifted)?.is_positive() {
                passed_at = Some(eps);
            }
        }
        let smallest = self.ladder.smallest();
        let status = match passed_at {
            Some(eps) if eps == smallest => ConeStatus::Positive,
            Some(_) => ConeStatus::Unknown,
            None => ConeStatus::NotPositive,
        };
        Ok(ConeVerdict {
            status,
            witness: passed_at,
            detail: "smallest passing ladder shift".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix, random_hermitian_element, seeded_rng};

    /// Cone of strictly positive diagonal 2x2 matrices.
    fn strict_diagonal_cone() -> FnCone {
        FnCone::new(ComplexMatrix::identity(2), |level, m| {
            let off_diag = (0..m.rows())
                .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .all(|(i, j)| m[(i, j)].norm() == 0.0);
            let strict = (0..2 * level).all(|i| m[(i, i)].re > 0.0);
            Ok(ConeVerdict {
                status: if off_diag && strict {
                    ConeStatus::Positive
                } else {
                    ConeStatus::NotPositive
                },
                witness: None,
                detail: "strictly positive diagonal".into(),
            })
        })
    }

    #[test]
    fn ladder_validation() {
        assert_eq!(Ladder::new(vec![]), Err(Error::EmptyLadder));
        assert_eq!(Ladder::new(vec![1e-6, 1e-3]), Err(Error::InvalidLadder));
        assert_eq!(Ladder::new(vec![1e-3, 0.0]), Err(Error::InvalidLadder));
        assert_eq!(Ladder::default().values(), &[1e-3, 1e-6, 1e-9]);
        assert!(matches!(
            archimedeanize(strict_diagonal_cone(), &[]),
            Err(Error::EmptyLadder)
        ));
    }

    #[test]
    fn boundary_point_recovered() {
        let arch = archimedeanize(strict_diagonal_cone(), &[1e-3, 1e-6, 1e-9]).unwrap();
        let u = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert!(!strict_diagonal_cone().test(1, &u).unwrap().is_positive());
        assert_eq!(arch.test(1, &u).unwrap().status, ConeStatus::Positive);
    }

    #[test]
    fn outside_point_rejected() {
        let arch = archimedeanize(strict_diagonal_cone(), &[0.5, 1e-3]).unwrap();
        let u = ComplexMatrix::diag_real(&[-1.0, 1.0]);
        assert_eq!(arch.test(1, &u).unwrap().status, ConeStatus::NotPositive);
    }

    #[test]
    fn unknown_between_ladder_entries() {
        let arch = archimedeanize(strict_diagonal_cone(), &[1e-3, 1e-9]).unwrap();
        let u = ComplexMatrix::diag_real(&[-1e-6, 1.0]);
        assert_eq!(arch.test(1, &u).unwrap().status, ConeStatus::Unknown);
    }

    #[test]
    fn already_positive_stays_positive() {
        let arch = archimedeanize(strict_diagonal_cone(), &[1e-3, 1e-6, 1e-9]).unwrap();
        let u = ComplexMatrix::diag_real(&[2.0, 0.5]);
        assert_eq!(arch.test(1, &u).unwrap().status, ConeStatus::Positive);
    }

    fn sample_systems() -> Vec<ConcreteOperatorSystem> {
        vec![
            ConcreteOperatorSystem::full(2),
            ConcreteOperatorSystem::diagonal2(),
        ]
    }

    #[test]
    fn archimedeanization_is_extensive_and_idempotent() {
        let tol = Tolerance::default();
        let ladder = Ladder::default();
        let mut rng = seeded_rng(11);
        for sys in sample_systems() {
            let base = SystemCone::new(&sys, tol);
            let once = archimedeanize(SystemCone::new(&sys, tol), ladder.values()).unwrap();
            let twice = archimedeanize(
                archimedeanize(SystemCone::new(&sys, tol), ladder.values()).unwrap(),
                ladder.values(),
            )
            .unwrap();
            for _ in 0..200 {
                let level = 1 + (rand::Rng::random::<u8>(&mut rng) % 2) as usize;
                let x = random_hermitian_element(&sys, level, &mut rng).unwrap();
                let b = base.test(level, &x).unwrap();
                let a1 = once.test(level, &x).unwrap();
                let a2 = twice.test(level, &x).unwrap();
                if b.is_positive() {
                    assert!(a1.is_positive());
                }
                assert_eq!(a1.status, a2.status);
                // concrete cones are closed
                assert_eq!(b.is_positive(), a1.is_positive());
            }
        }
    }

    #[test]
    fn system_cone_is_conjugation_monotone() {
        let tol = Tolerance::default();
        let mut rng = seeded_rng(5);
        for sys in sample_systems() {
            let cone = SystemCone::new(&sys, tol);
            let d = sys.ambient_dim();
            for checked in 0..100 {
                let x = crate::sampling::random_positive_element(&sys, 2, &mut rng, tol).unwrap();
                assert!(cone.test(2, &x).unwrap().is_positive());
                let rows = 1 + checked % 3;
                let alpha = gaussian_matrix(rows, 2, &mut rng);
                let lifted = kron(&alpha, &ComplexMatrix::identity(d));
                let y = crate::linalg::congruence(&lifted, &x).unwrap();
                assert!(cone.test(rows, &y).unwrap().is_positive());
            }
            assert!(cone.test(1, cone.unit()).unwrap().is_positive());
        }
    }
}
