//! Linear maps between concrete operator systems and their positivity
//! verdicts: unitality, complete positivity (Choi matrix on full algebras,
//! sampled falsification elsewhere) and complete order embeddings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermitian_eigenvalues, min_eigenvalue, ComplexMatrix, Tolerance, C64, ONE,
    ZERO,
};
use crate::opsys::ConcreteOperatorSystem;
use crate::sampling::{
    gaussian_matrix, random_hermitian_element, random_positive_element, seeded_rng,
};

/// Largest Choi matrix side for which complete positivity is decided by an
/// explicit eigenvalue computation.
pub const CHOI_EXACT_MAX: usize = 256;

/// How a map acts on ambient matrices.
#[derive(Debug, Clone)]
pub enum MapAction {
    /// Images of the domain basis, extended linearly through coordinates.
    Images(Vec<ComplexMatrix>),
    /// `x ↦ I_copies ⊗ x`, the block-diagonal embedding `diag(x, …, x)`.
    Ampliation { copies: usize },
    /// `x ↦ Σ V x V*`.
    Kraus(Vec<ComplexMatrix>),
    /// Maps applied left to right.
    Compose(Vec<LinearMap>),
}

#[derive(Debug, Clone)]
pub struct LinearMap {
    domain: Arc<ConcreteOperatorSystem>,
    codomain: Arc<ConcreteOperatorSystem>,
    action: MapAction,
}

impl LinearMap {
    /// A map given by the images of the domain basis. Images must lie in the
    /// codomain and the map must commute with the adjoint.
    pub fn from_images(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        images: Vec<ComplexMatrix>,
        tol: Tolerance,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                context: "number of images",
                expected: domain.dim(),
                found: images.len(),
            });
        }
        for (index, img) in images.iter().enumerate() {
            let dc = codomain.ambient_dim();
            if img.rows() != dc || img.cols() != dc {
                return Err(Error::DimensionMismatch {
                    context: "image size",
                    expected: dc,
                    found: img.rows(),
                });
            }
            if !codomain.contains(1, img, tol)?.inside {
                return Err(Error::ImageNotInCodomain { index });
            }
        }
        let map = Self {
            domain,
            codomain,
            action: MapAction::Images(images),
        };
        for index in 0..map.domain.dim() {
            let b = map.domain.basis_element(index);
            let lhs = map.apply_unchecked(1, &b.adjoint());
            let rhs = map.image_of_basis(index).adjoint();
            if !lhs.approx_eq(&rhs, tol.eps()) {
                return Err(Error::NotAdjointCompatible { index });
            }
        }
        Ok(map)
    }

    /// Images computed by evaluating `f` on each domain basis element.
    pub fn from_fn(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
        tol: Tolerance,
    ) -> Result<Self> {
        let images = domain.basis().map(|b| f(&b)).collect();
        Self::from_images(domain, codomain, images, tol)
    }

    /// A map on a full matrix algebra given by the images of the matrix units.
    pub fn from_unit_images(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        unit_image: impl Fn(usize, usize) -> ComplexMatrix,
        tol: Tolerance,
    ) -> Result<Self> {
        if !domain.is_full() {
            return Err(Error::DomainNotFullAlgebra);
        }
        let m = domain.ambient_dim();
        let units: Vec<Vec<ComplexMatrix>> = (0..m)
            .map(|i| (0..m).map(|j| unit_image(i, j)).collect())
            .collect();
        let dc = codomain.ambient_dim();
        let images = domain
            .basis()
            .map(|b| {
                let mut img = ComplexMatrix::zeros(dc, dc);
                for i in 0..m {
                    for j in 0..m {
                        if b[(i, j)] != ZERO {
                            img.add_scaled(b[(i, j)], &units[i][j]);
                        }
                    }
                }
                img
            })
            .collect();
        Self::from_images(domain, codomain, images, tol)
    }

    /// The map whose Choi matrix `[f(E_ij)]` is `choi`.
    pub fn from_choi(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        choi: &ComplexMatrix,
        tol: Tolerance,
    ) -> Result<Self> {
        let dc = codomain.ambient_dim();
        let expected = domain.ambient_dim() * dc;
        if choi.rows() != expected || choi.cols() != expected {
            return Err(Error::DimensionMismatch {
                context: "Choi matrix size",
                expected,
                found: choi.rows(),
            });
        }
        Self::from_unit_images(domain, codomain, |i, j| choi.block(i, j, dc), tol)
    }

    pub fn identity(system: Arc<ConcreteOperatorSystem>) -> Self {
        Self {
            domain: system.clone(),
            codomain: system,
            action: MapAction::Ampliation { copies: 1 },
        }
    }

    /// `x ↦ diag(x, …, x)` with `copies` blocks. With one copy and equal
    /// ambient sizes this is the inclusion of a subsystem.
    pub fn ampliation(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        copies: usize,
        tol: Tolerance,
    ) -> Result<Self> {
        let expected = copies * domain.ambient_dim();
        if copies == 0 || codomain.ambient_dim() != expected {
            return Err(Error::DimensionMismatch {
                context: "ampliation codomain size",
                expected,
                found: codomain.ambient_dim(),
            });
        }
        let map = Self {
            domain,
            codomain,
            action: MapAction::Ampliation { copies },
        };
        map.check_images_in_codomain(tol)?;
        Ok(map)
    }

    /// `x ↦ Σ V x V*`; every operator must be `d_codomain x d_domain`.
    pub fn kraus(
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        ops: Vec<ComplexMatrix>,
        tol: Tolerance,
    ) -> Result<Self> {
        for v in &ops {
            if v.rows() != codomain.ambient_dim() || v.cols() != domain.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator shape",
                    expected: codomain.ambient_dim(),
                    found: v.rows(),
                });
            }
        }
        let map = Self {
            domain,
            codomain,
            action: MapAction::Kraus(ops),
        };
        map.check_images_in_codomain(tol)?;
        Ok(map)
    }

    /// Transpose on a system closed under transposition.
    pub fn transpose(system: Arc<ConcreteOperatorSystem>, tol: Tolerance) -> Result<Self> {
        Self::from_fn(system.clone(), system, |x| x.transpose(), tol)
    }

    fn check_images_in_codomain(&self, tol: Tolerance) -> Result<()> {
        if self.codomain.is_implicit_full() {
            return Ok(());
        }
        for index in 0..self.domain.dim() {
            let img = self.image_of_basis(index);
            if !self.codomain.contains(1, &img, tol)?.inside {
                return Err(Error::ImageNotInCodomain { index });
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &Arc<ConcreteOperatorSystem> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<ConcreteOperatorSystem> {
        &self.codomain
    }

    pub fn action(&self) -> &MapAction {
        &self.action
    }

    /// Image of the `k`-th domain basis element.
    pub fn image_of_basis(&self, k: usize) -> ComplexMatrix {
        match &self.action {
            MapAction::Images(images) => images[k].clone(),
            _ => self.apply_unchecked(1, &self.domain.basis_element(k)),
        }
    }

    pub fn images(&self) -> Vec<ComplexMatrix> {
        (0..self.domain.dim()).map(|k| self.image_of_basis(k)).collect()
    }

    /// `(f ⊗ id_{M_n})(m)` for `m ∈ M_n(domain)`.
    pub fn apply(&self, n: usize, m: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
        if self.domain.is_implicit_full() {
            let expected = n * self.domain.ambient_dim();
            if n == 0 {
                return Err(Error::ZeroLevel);
            }
            if m.rows() != expected || m.cols() != expected {
                return Err(Error::DimensionMismatch {
                    context: "element size at level",
                    expected,
                    found: m.rows(),
                });
            }
        } else {
            let membership = self.domain.contains(n, m, tol)?;
            if !membership.inside {
                return Err(Error::NotInSystem {
                    residual: membership.residual,
                });
            }
        }
        Ok(self.apply_unchecked(n, m))
    }

    /// Level-`n` application without membership validation. Components of
    /// `m` outside the domain span are handled by coordinates (projected away)
    /// for image-defined maps and passed through otherwise.
    pub fn apply_unchecked(&self, n: usize, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.domain.ambient_dim();
        let dc = self.codomain.ambient_dim();
        match &self.action {
            MapAction::Images(images) => {
                let mut out = ComplexMatrix::zeros(n * dc, n * dc);
                for i in 0..n {
                    for j in 0..n {
                        let (coords, _) = self.domain.coordinates(&m.block(i, j, d));
                        let mut img = ComplexMatrix::zeros(dc, dc);
                        for (c, b) in coords.iter().zip(images) {
                            if *c != ZERO {
                                img.add_scaled(*c, b);
                            }
                        }
                        out.set_block(i, j, &img);
                    }
                }
                out
            }
            MapAction::Ampliation { copies } => {
                let c = *copies;
                let mut out = ComplexMatrix::zeros(n * dc, n * dc);
                for i in 0..n {
                    for j in 0..n {
                        for s in 0..c {
                            for a in 0..d {
                                for b in 0..d {
                                    out[(i * dc + s * d + a, j * dc + s * d + b)] =
                                        m[(i * d + a, j * d + b)];
                                }
                            }
                        }
                    }
                }
                out
            }
            MapAction::Kraus(ops) => {
                let mut out = ComplexMatrix::zeros(n * dc, n * dc);
                for v in ops {
                    let lifted = crate::linalg::kron(&ComplexMatrix::identity(n), v);
                    let term = &(&lifted * m) * &lifted.adjoint();
                    out.add_scaled(ONE, &term);
                }
                out
            }
            MapAction::Compose(maps) => maps
                .iter()
                .fold(m.clone(), |acc, f| f.apply_unchecked(n, &acc)),
        }
    }

    /// Choi matrix `[f(E_ij)]_{i,j}` of a map on a full matrix algebra.
    pub fn choi_matrix(&self) -> Result<ComplexMatrix> {
        if !self.domain.is_full() {
            return Err(Error::DomainNotFullAlgebra);
        }
        let m = self.domain.ambient_dim();
        let dc = self.codomain.ambient_dim();
        let mut choi = ComplexMatrix::zeros(m * dc, m * dc);
        for i in 0..m {
            for j in 0..m {
                let img = self.apply_unchecked(1, &ComplexMatrix::unit(m, i, j));
                choi.set_block(i, j, &img);
            }
        }
        Ok(choi)
    }

    pub fn is_unital(&self, tol: Tolerance) -> bool {
        let img = self.apply_unchecked(1, &self.domain.unit(1));
        img.approx_eq(&self.codomain.unit(1), tol.eps())
    }

    /// True when complete positivity follows from the representation itself
    /// (block embeddings, Kraus sums and their composites).
    pub fn is_structurally_cp(&self) -> bool {
        match &self.action {
            MapAction::Images(_) => false,
            MapAction::Ampliation { .. } | MapAction::Kraus(_) => true,
            MapAction::Compose(maps) => maps.iter().all(Self::is_structurally_cp),
        }
    }

    /// True for block embeddings and their composites, which preserve the
    /// spectrum (up to multiplicity) at every matrix level.
    pub fn is_structural_order_embedding(&self) -> bool {
        match &self.action {
            MapAction::Ampliation { .. } => true,
            MapAction::Compose(maps) => maps.iter().all(Self::is_structural_order_embedding),
            _ => false,
        }
    }

    /// True when `f` is the inclusion of its domain into a codomain on the
    /// same ambient space: cones at every level are then restrictions of the
    /// same PSD cones.
    pub fn is_concrete_inclusion(&self, tol: Tolerance) -> bool {
        self.domain.ambient_dim() == self.codomain.ambient_dim()
            && (0..self.domain.dim()).all(|k| {
                self.image_of_basis(k)
                    .approx_eq(&self.domain.basis_element(k), tol.eps())
            })
    }

    /// Injectivity on coordinates: the vectorized basis images have a Gram
    /// matrix with smallest eigenvalue above `eps`.
    pub fn is_injective(&self, tol: Tolerance) -> Result<bool> {
        if self.is_structural_order_embedding() {
            return Ok(true);
        }
        let images = self.images();
        let k = images.len();
        let gram = ComplexMatrix::from_fn(k, k, |a, b| images[a].inner(&images[b]));
        Ok(min_eigenvalue(&gram, tol)? > tol.eps())
    }

    /// Maximum image discrepancy over the domain basis.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.domain.dim() != other.domain.dim()
            || self.codomain.ambient_dim() != other.codomain.ambient_dim()
        {
            return f64::INFINITY;
        }
        (0..self.domain.dim())
            .map(|k| self.image_of_basis(k).max_abs_diff(&other.image_of_basis(k)))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.distance(other) <= tol.eps()
    }
}

/// `g ∘ f`: apply `f` first, then `g`.
pub fn compose(f: &LinearMap, g: &LinearMap, tol: Tolerance) -> Result<LinearMap> {
    if !f.codomain.same_as(&g.domain, tol) {
        return Err(Error::CompositionMismatch);
    }
    let action = match (&f.action, &g.action) {
        (MapAction::Ampliation { copies: a }, MapAction::Ampliation { copies: b }) => {
            MapAction::Ampliation { copies: a * b }
        }
        _ => {
            let mut parts = Vec::new();
            for h in [f, g] {
                match &h.action {
                    MapAction::Compose(inner) => parts.extend(inner.iter().cloned()),
                    _ => parts.push(h.clone()),
                }
            }
            MapAction::Compose(parts)
        }
    };
    Ok(LinearMap {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        action,
    })
}

/// `φ_{p,q} = φ_{q-1} ∘ … ∘ φ_p` with stages numbered from 1, so that
/// `maps[k - 1]` is `φ_k`. Requires `1 ≤ p < q ≤ maps.len() + 1`.
pub fn path_compose(maps: &[LinearMap], p: usize, q: usize, tol: Tolerance) -> Result<LinearMap> {
    if p == 0 || p >= q || q > maps.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "path ({p}, {q}) outside 1..={}",
            maps.len() + 1
        )));
    }
    let mut acc = maps[p - 1].clone();
    for f in &maps[p..q - 1] {
        acc = compose(&acc, f, tol)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CpStatus {
    #[serde(rename = "UCP")]
    Ucp,
    #[serde(rename = "CPnotUnital")]
    CpNotUnital,
    #[serde(rename = "NotCP")]
    NotCp,
    UnknownUpToLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMethod {
    Choi,
    Structural,
    Sampled,
}

/// A positive input whose image fails to be positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpWitness {
    pub level: usize,
    pub input: ComplexMatrix,
    pub input_min_eigenvalue: f64,
    pub image_min_eigenvalue: f64,
}

impl CpWitness {
    /// Recomputes both sides: the input is positive in the domain and its
    /// image has an eigenvalue below `-eps`.
    pub fn verify(&self, f: &LinearMap, tol: Tolerance) -> Result<bool> {
        let input_ok = f
            .domain()
            .is_positive(self.level, &self.input, tol)?
            .is_positive();
        let image = f.apply(self.level, &self.input, tol)?;
        let image_min = min_eigenvalue(&image.hermitian_part(), tol)?;
        Ok(input_ok && image_min < -tol.eps())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpVerdict {
    pub status: CpStatus,
    pub method: CheckMethod,
    pub unital: bool,
    pub checked_level: usize,
    pub samples_tested: usize,
    pub choi_min_eigenvalue: Option<f64>,
    pub witness: Option<CpWitness>,
}

impl CpVerdict {
    /// UCP exactly, or unital and unfalsified up to the checked level.
    pub fn is_ucp_up_to_level(&self) -> bool {
        match self.status {
            CpStatus::Ucp => true,
            CpStatus::UnknownUpToLevel => self.unital,
            _ => false,
        }
    }

    pub fn report_label(&self) -> String {
        match self.status {
            CpStatus::Ucp => "UCP".into(),
            CpStatus::CpNotUnital => "CPnotUnital".into(),
            CpStatus::NotCp => "NotCP".into(),
            CpStatus::UnknownUpToLevel if self.unital => {
                format!("UCP-up-to-level-{}", self.checked_level)
            }
            CpStatus::UnknownUpToLevel => {
                format!("CP-up-to-level-{} (not unital)", self.checked_level)
            }
        }
    }
}

/// Sampling budget for the falsification checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub max_level: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self {
            max_level: 3,
            samples: 200,
            seed: 0,
        }
    }
}

/// Unitality and complete positivity of `f`.
///
/// Maps on full matrix algebras are decided through the Choi matrix when it
/// has side at most [`CHOI_EXACT_MAX`]. Larger block embeddings and Kraus
/// sums are CP by construction. Everything else is falsified by sampling
/// positive elements at levels `1..=max_level`.
pub fn is_ucp(f: &LinearMap, budget: SampleBudget, tol: Tolerance) -> Result<CpVerdict> {
    let unital = f.is_unital(tol);
    let cp_status = |cp: bool| match (cp, unital) {
        (true, true) => CpStatus::Ucp,
        (true, false) => CpStatus::CpNotUnital,
        (false, _) => CpStatus::NotCp,
    };
    let m = f.domain.ambient_dim();
    let choi_side = m * f.codomain.ambient_dim();
    if f.domain.is_full() && choi_side <= CHOI_EXACT_MAX {
        let choi = f.choi_matrix()?;
        let eig = hermitian_eigen(&choi.hermitian_part(), tol)?;
        let min = eig.min();
        let cp = min >= -tol.eps();
        let witness = if cp {
            None
        } else {
            // [E_ij]_{i,j} is positive and maps to the Choi matrix itself.
            let input = ComplexMatrix::from_fn(m * m, m * m, |r, c| {
                let (i, a) = (r / m, r % m);
                let (j, b) = (c / m, c % m);
                if a == i && b == j {
                    ONE
                } else {
                    ZERO
                }
            });
            Some(CpWitness {
                level: m,
                input,
                input_min_eigenvalue: 0.0,
                image_min_eigenvalue: min,
            })
        };
        return Ok(CpVerdict {
            status: cp_status(cp),
            method: CheckMethod::Choi,
            unital,
            checked_level: m,
            samples_tested: 0,
            choi_min_eigenvalue: Some(min),
            witness,
        });
    }
    if f.is_structurally_cp() {
        return Ok(CpVerdict {
            status: cp_status(true),
            method: CheckMethod::Structural,
            unital,
            checked_level: budget.max_level,
            samples_tested: 0,
            choi_min_eigenvalue: None,
            witness: None,
        });
    }

    let mut rng = seeded_rng(budget.seed);
    let mut tested = 0;
    for n in 1..=budget.max_level {
        for s in 0..budget.samples {
            let input = if f.domain.is_full() && s % 2 == 1 {
                let v = gaussian_matrix(n * m, 1, &mut rng);
                &v * &v.adjoint()
            } else {
                random_positive_element(&f.domain, n, &mut rng, tol)?
            };
            let input_min = min_eigenvalue(&input, tol)?;
            if input_min < -tol.eps() {
                continue;
            }
            tested += 1;
            let image = f.apply_unchecked(n, &input).hermitian_part();
            let image_min = min_eigenvalue(&image, tol)?;
            if image_min < -tol.eps() {
                return Ok(CpVerdict {
                    status: CpStatus::NotCp,
                    method: CheckMethod::Sampled,
                    unital,
                    checked_level: n,
                    samples_tested: tested,
                    choi_min_eigenvalue: None,
                    witness: Some(CpWitness {
                        level: n,
                        input,
                        input_min_eigenvalue: input_min,
                        image_min_eigenvalue: image_min,
                    }),
                });
            }
        }
    }
    Ok(CpVerdict {
        status: CpStatus::UnknownUpToLevel,
        method: CheckMethod::Sampled,
        unital,
        checked_level: budget.max_level,
        samples_tested: tested,
        choi_min_eigenvalue: None,
        witness: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderStatus {
    Embedding,
    NotEmbedding,
    UnknownUpToLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// A positive input with a non-positive image.
    Preservation,
    /// A non-positive input with a positive image.
    Reflection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderWitness {
    pub direction: Direction,
    pub level: usize,
    pub input: ComplexMatrix,
    pub input_min_eigenvalue: f64,
    pub image_min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub status: OrderStatus,
    pub method: CheckMethod,
    pub unital: bool,
    pub checked_level: usize,
    pub samples_tested: usize,
    pub witness: Option<OrderWitness>,
}

/// Checks `u ≥ 0 ⇔ f_n(u) ≥ 0` for `n ≤ max_level`.
///
/// Block embeddings and concrete inclusions are accepted structurally. Otherwise positive inputs test
/// preservation, and Hermitian inputs shifted so that their image sits on the
/// boundary of the positive cone test reflection.
pub fn is_complete_order_mono(
    f: &LinearMap,
    budget: SampleBudget,
    tol: Tolerance,
) -> Result<OrderVerdict> {
    if !f.is_injective(tol)? {
        return Err(Error::NotInjective);
    }
    let unital = f.is_unital(tol);
    if f.is_structural_order_embedding() || f.is_concrete_inclusion(tol) {
        return Ok(OrderVerdict {
            status: OrderStatus::Embedding,
            method: CheckMethod::Structural,
            unital,
            checked_level: budget.max_level,
            samples_tested: 0,
            witness: None,
        });
    }
    let mut rng = seeded_rng(budget.seed);
    let mut tested = 0;
    let fail = |direction, level, input, input_min, image_min, tested| OrderVerdict {
        status: OrderStatus::NotEmbedding,
        method: CheckMethod::Sampled,
        unital,
        checked_level: level,
        samples_tested: tested,
        witness: Some(OrderWitness {
            direction,
            level,
            input,
            input_min_eigenvalue: input_min,
            image_min_eigenvalue: image_min,
        }),
    };
    for n in 1..=budget.max_level {
        for _ in 0..budget.samples {
            tested += 1;
            let u = random_positive_element(&f.domain, n, &mut rng, tol)?;
            let u_min = min_eigenvalue(&u, tol)?;
            let image_min = min_eigenvalue(&f.apply_unchecked(n, &u).hermitian_part(), tol)?;
            if u_min >= -tol.eps() && image_min < -tol.eps() {
                return Ok(fail(Direction::Preservation, n, u, u_min, image_min, tested));
            }

            let h = random_hermitian_element(&f.domain, n, &mut rng)?;
            let fh = f.apply_unchecked(n, &h).hermitian_part();
            let shift = -min_eigenvalue(&fh, tol)?;
            let mut v = h;
            v.add_scaled(C64::new(shift, 0.0), &f.domain.unit(n));
            let image = f.apply_unchecked(n, &v).hermitian_part();
            let image_min = min_eigenvalue(&image, tol)?;
            if image_min < -tol.eps() {
                // not unital enough for the shift to land on the boundary
                continue;
            }
            let v_min = min_eigenvalue(&v, tol)?;
            if v_min < -tol.eps() {
                return Ok(fail(Direction::Reflection, n, v, v_min, image_min, tested));
            }
        }
    }
    Ok(OrderVerdict {
        status: OrderStatus::UnknownUpToLevel,
        method: CheckMethod::Sampled,
        unital,
        checked_level: budget.max_level,
        samples_tested: tested,
        witness: None,
    })
}

/// Spectrum of the Choi matrix, for reports.
pub fn choi_spectrum(f: &LinearMap, tol: Tolerance) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&f.choi_matrix()?.hermitian_part(), tol)
}
