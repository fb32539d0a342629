use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ConeStatus, ConeVerdict};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, min_eigenvalue, symmetrized, ComplexMatrix, Tolerance, C64, ZERO,
};

/// An adjoint-closed unital subspace of the `d x d` matrices, given by a basis
/// whose first element is the identity.
///
/// Full matrix algebras are stored implicitly: their basis is the identity
/// followed by every matrix unit `E_ij` except `E_00`, in row-major order.
#[derive(Debug, Clone)]
pub struct ConcreteOperatorSystem {
    name: String,
    ambient_dim: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Full,
    Subspace(Subspace),
}

#[derive(Debug, Clone)]
struct Subspace {
    basis: Vec<ComplexMatrix>,
    /// Frobenius-orthonormal basis of the same span (Gram-Schmidt of `basis`).
    ortho: Vec<ComplexMatrix>,
    /// Upper-triangular `r[j][k] = <ortho_j, basis_k>`.
    r: Vec<Vec<C64>>,
}

/// Result of a subspace membership query at some matrix level.
#[derive(Debug, Clone)]
pub struct Membership {
    pub inside: bool,
    pub residual: f64,
    /// Coordinates ordered block-major: entry `((i * n + j) * dim + k)` is the
    /// weight of `E_ij ⊗ basis[k]`. Present only when `inside`.
    pub coordinates: Option<Vec<C64>>,
}

impl ConcreteOperatorSystem {
    /// Validates a basis eagerly: unit first, independent, adjoint-closed.
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        basis: Vec<ComplexMatrix>,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = ambient_dim;
        if d == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        for b in &basis {
            if b.rows() != d || b.cols() != d {
                return Err(Error::DimensionMismatch {
                    context: "basis element",
                    expected: d,
                    found: if b.rows() != d { b.rows() } else { b.cols() },
                });
            }
        }
        match basis.first() {
            Some(b0) if b0.approx_eq(&ComplexMatrix::identity(d), tol.eps()) => {}
            _ => return Err(Error::MissingUnit),
        }

        let gram = ComplexMatrix::from_fn(basis.len(), basis.len(), |a, b| {
            basis[a].inner(&basis[b])
        });
        let min_gram_eigenvalue = min_eigenvalue(&gram, tol)?;
        if min_gram_eigenvalue <= tol.eps() {
            return Err(Error::DependentBasis {
                min_gram_eigenvalue,
            });
        }

        let (ortho, r) = gram_schmidt(&basis);
        let sub = Subspace { basis, ortho, r };
        for (index, b) in sub.basis.iter().enumerate() {
            let residual = sub.residual(&b.adjoint());
            if residual > tol.eps() {
                return Err(Error::NotAdjointClosed { index, residual });
            }
        }
        Ok(Self {
            name: name.into(),
            ambient_dim: d,
            kind: Kind::Subspace(sub),
        })
    }

    /// The full matrix algebra `M_d`.
    pub fn full(d: usize) -> Self {
        assert!(d > 0, "matrix algebra of size zero");
        Self {
            name: format!("M{d}"),
            ambient_dim: d,
            kind: Kind::Full,
        }
    }

    /// The one-dimensional system of scalars.
    pub fn scalars() -> Self {
        Self::full(1)
    }

    /// `span{I, E_00 - E_11}` inside `M_2`: the diagonal matrices.
    pub fn diagonal2() -> Self {
        let basis = vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::diag_real(&[1.0, -1.0]),
        ];
        Self::new("D2", 2, basis, Tolerance::default()).expect("valid diagonal system")
    }

    /// All of `M_2` presented through the Pauli basis.
    pub fn pauli2() -> Self {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let basis = vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::from_rows(&[&[ZERO, one], &[one, ZERO]]),
            ComplexMatrix::from_rows(&[&[ZERO, -i], &[i, ZERO]]),
            ComplexMatrix::diag_real(&[1.0, -1.0]),
        ];
        Self::new("Pauli2", 2, basis, Tolerance::default()).expect("valid Pauli system")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Full => self.ambient_dim * self.ambient_dim,
            Kind::Subspace(s) => s.basis.len(),
        }
    }

    /// True when the span is all of `M_d`.
    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim * self.ambient_dim
    }

    /// Whether the basis is the implicit matrix-unit basis.
    pub fn is_implicit_full(&self) -> bool {
        matches!(self.kind, Kind::Full)
    }

    pub fn basis_element(&self, k: usize) -> ComplexMatrix {
        let d = self.ambient_dim;
        match &self.kind {
            Kind::Full if k == 0 => ComplexMatrix::identity(d),
            Kind::Full => ComplexMatrix::unit(d, k / d, k % d),
            Kind::Subspace(s) => s.basis[k].clone(),
        }
    }

    pub fn basis(&self) -> impl Iterator<Item = ComplexMatrix> + '_ {
        (0..self.dim()).map(move |k| self.basis_element(k))
    }

    /// The order unit at level `n`, `I_n ⊗ 1`.
    pub fn unit(&self, n: usize) -> ComplexMatrix {
        ComplexMatrix::identity(n * self.ambient_dim)
    }

    /// Matrix level of an ambient element, checking its shape.
    pub fn level_of(&self, m: &ComplexMatrix) -> Result<usize> {
        let size = m.square_dim()?;
        let d = self.ambient_dim;
        if size == 0 || size % d != 0 {
            return Err(Error::DimensionMismatch {
                context: "element size must be a positive multiple of the ambient dimension",
                expected: d,
                found: size,
            });
        }
        Ok(size / d)
    }

    fn check_level(&self, n: usize, m: &ComplexMatrix) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let expected = n * self.ambient_dim;
        if m.rows() != expected || m.cols() != expected {
            return Err(Error::DimensionMismatch {
                context: "element size at level",
                expected,
                found: if m.rows() != expected { m.rows() } else { m.cols() },
            });
        }
        Ok(())
    }

    /// Coordinates of a `d x d` matrix over the basis together with the
    /// Frobenius residual of its projection onto the span.
    pub fn coordinates(&self, x: &ComplexMatrix) -> (Vec<C64>, f64) {
        let d = self.ambient_dim;
        match &self.kind {
            Kind::Full => {
                let x00 = x[(0, 0)];
                let coords = (0..d * d)
                    .map(|k| {
                        let (i, j) = (k / d, k % d);
                        if k == 0 {
                            x00
                        } else if i == j {
                            x[(i, i)] - x00
                        } else {
                            x[(i, j)]
                        }
                    })
                    .collect();
                (coords, 0.0)
            }
            Kind::Subspace(s) => s.coordinates(x),
        }
    }

    /// `sum_k coords[k] * basis[k]`.
    pub fn combine(&self, coords: &[C64]) -> ComplexMatrix {
        let d = self.ambient_dim;
        match &self.kind {
            Kind::Full => {
                let mut x = ComplexMatrix::zeros(d, d);
                for (k, &c) in coords.iter().enumerate() {
                    if k == 0 {
                        for i in 0..d {
                            x[(i, i)] += c;
                        }
                    } else {
                        x[(k / d, k % d)] += c;
                    }
                }
                x
            }
            Kind::Subspace(s) => {
                let mut x = ComplexMatrix::zeros(d, d);
                for (b, &c) in s.basis.iter().zip(coords) {
                    x.add_scaled(c, b);
                }
                x
            }
        }
    }

    /// Orthogonal projection of a `d x d` matrix onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match &self.kind {
            Kind::Full => x.clone(),
            Kind::Subspace(s) => s.project(x),
        }
    }

    /// Blockwise projection of a level-`n` element onto `M_n(S)`.
    pub fn project_level(&self, n: usize, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_level(n, m)?;
        if self.is_implicit_full() {
            return Ok(m.clone());
        }
        let d = self.ambient_dim;
        let mut out = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                out.set_block(i, j, &self.project(&m.block(i, j, d)));
            }
        }
        Ok(out)
    }

    /// Membership of a level-`n` element in `M_n(S)`, by least squares over
    /// `E_ij ⊗ basis[k]`.
    pub fn contains(&self, n: usize, m: &ComplexMatrix, tol: Tolerance) -> Result<Membership> {
        self.check_level(n, m)?;
        let d = self.ambient_dim;
        let mut coords = Vec::with_capacity(n * n * self.dim());
        let mut residual_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (c, r) = self.coordinates(&m.block(i, j, d));
                coords.extend(c);
                residual_sq += r * r;
            }
        }
        let residual = residual_sq.sqrt();
        let inside = residual <= tol.eps();
        Ok(Membership {
            inside,
            residual,
            coordinates: inside.then_some(coords),
        })
    }

    /// Positivity in `M_n(S)` via the ambient embedding.
    pub fn is_positive(&self, n: usize, m: &ComplexMatrix, tol: Tolerance) -> Result<ConeVerdict> {
        let membership = self.contains(n, m, tol)?;
        if !membership.inside {
            return Err(Error::NotInSystem {
                residual: membership.residual,
            });
        }
        let h = symmetrized(m, tol)?;
        let values = hermitian_eigenvalues(&h, tol)?;
        let min = values.first().copied().unwrap_or(0.0);
        let status = if min >= -tol.eps() {
            ConeStatus::Positive
        } else {
            ConeStatus::NotPositive
        };
        Ok(ConeVerdict {
            status,
            witness: Some(min),
            detail: format!("min eigenvalue in M_{n}({})", self.name),
        })
    }

    /// Structural equality: same ambient size and the same basis within `tol`.
    pub fn same_as(&self, other: &Self, tol: Tolerance) -> bool {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return false;
        }
        match (&self.kind, &other.kind) {
            (Kind::Full, Kind::Full) => true,
            (Kind::Subspace(a), Kind::Subspace(b)) => a
                .basis
                .iter()
                .zip(&b.basis)
                .all(|(x, y)| x.approx_eq(y, tol.eps())),
            _ => false,
        }
    }

    /// Frobenius-orthonormal Hermitian basis of the span with `I/sqrt(d)`
    /// first. Materializes `d^2` matrices for full algebras.
    pub fn hermitian_orthonormal_basis(&self) -> Vec<ComplexMatrix> {
        let d = self.ambient_dim;
        let mut candidates = vec![ComplexMatrix::identity(d)];
        let i = C64::new(0.0, 1.0);
        for b in self.basis().skip(1) {
            candidates.push((&b + &b.adjoint()).scale_real(0.5));
            candidates.push((&b - &b.adjoint()).scale(-i * 0.5));
        }
        let mut out: Vec<ComplexMatrix> = Vec::with_capacity(self.dim());
        for c in candidates {
            let mut v = c;
            for _ in 0..2 {
                for q in &out {
                    let w = q.inner(&v).re;
                    v.add_scaled(C64::new(-w, 0.0), q);
                }
            }
            let norm = v.frobenius_norm();
            if norm > 1e-8 {
                out.push(v.hermitian_part().scale_real(1.0 / norm));
            }
            if out.len() == self.dim() {
                break;
            }
        }
        out
    }
}

impl Subspace {
    fn coordinates(&self, x: &ComplexMatrix) -> (Vec<C64>, f64) {
        let y: Vec<C64> = self.ortho.iter().map(|q| q.inner(x)).collect();
        let mut residual = x.clone();
        for (q, &c) in self.ortho.iter().zip(&y) {
            residual.add_scaled(-c, q);
        }
        let dim = y.len();
        let mut c = vec![ZERO; dim];
        for k in (0..dim).rev() {
            let tail: C64 = (k + 1..dim).map(|j| self.r[k][j] * c[j]).sum();
            c[k] = (y[k] - tail) / self.r[k][k];
        }
        (c, residual.frobenius_norm())
    }

    fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(x.rows(), x.cols());
        for q in &self.ortho {
            p.add_scaled(q.inner(x), q);
        }
        p
    }

    fn residual(&self, x: &ComplexMatrix) -> f64 {
        (x - &self.project(x)).frobenius_norm()
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn gram_schmidt(basis: &[ComplexMatrix]) -> (Vec<ComplexMatrix>, Vec<Vec<C64>>) {
    let n = basis.len();
    let mut ortho: Vec<ComplexMatrix> = Vec::with_capacity(n);
    let mut r = vec![vec![ZERO; n]; n];
    for (k, b) in basis.iter().enumerate() {
        let mut v = b.clone();
        for _ in 0..2 {
            for (j, q) in ortho.iter().enumerate() {
                let c = q.inner(&v);
                r[j][k] += c;
                v.add_scaled(-c, q);
            }
        }
        let norm = v.frobenius_norm();
        r[k][k] = C64::new(norm, 0.0);
        ortho.push(v.scale_real(1.0 / norm));
    }
    (ortho, r)
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    ambient_dim: usize,
    name: String,
    basis: Vec<ComplexMatrix>,
}

impl Serialize for ConcreteOperatorSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRepr {
            ambient_dim: self.ambient_dim,
            name: self.name.clone(),
            basis: self.basis().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConcreteOperatorSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SystemRepr::deserialize(deserializer)?;
        ConcreteOperatorSystem::new(repr.name, repr.ambient_dim, repr.basis, Tolerance::default())
            .map_err(serde::de::Error::custom)
    }
}
