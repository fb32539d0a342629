//! Min and max tensor cones of two concrete systems.
//!
//! Elements of `M_n(S ⊗ T)` are represented spatially: an `n x n` block
//! matrix whose blocks are `d_S d_T x d_S d_T` matrices in
//! `span(S) ⊗ span(T)`, with the left factor as the outer Kronecker index.
//! The min cone is the spatial PSD cone. Max membership is one-sided: a
//! [`MaxCertificate`] `(α, P, Q, ε)` proves `ε·1 + u = α(P ⊗ Q)α*`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, kron, min_eigenvalue, psd_factor, ComplexMatrix, Tolerance, C64, ONE, ZERO,
};
use crate::opsys::{ConcreteOperatorSystem, ConeStatus, ConeVerdict, Ladder};
use crate::sampling::{derived_rng, gaussian_matrix, random_positive_element};

type System = Arc<ConcreteOperatorSystem>;

/// Reconstruction tolerance factor for certificates.
pub const CERTIFICATE_SLACK: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct TensorElement {
    left: System,
    right: System,
    level: usize,
    matrix: ComplexMatrix,
}

impl TensorElement {
    pub fn new(
        left: System,
        right: System,
        level: usize,
        matrix: ComplexMatrix,
        tol: Tolerance,
    ) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let expected = level * left.ambient_dim() * right.ambient_dim();
        if matrix.rows() != expected || matrix.cols() != expected {
            return Err(Error::DimensionMismatch {
                context: "tensor element size",
                expected,
                found: matrix.rows(),
            });
        }
        let projected = project_joint(&left, &right, level, &matrix);
        let residual = (&matrix - &projected).frobenius_norm();
        if residual > tol.eps() {
            return Err(Error::NotInSpan { residual });
        }
        Ok(Self {
            left,
            right,
            level,
            matrix,
        })
    }

    /// `I_n ⊗ 1_S ⊗ 1_T`.
    pub fn unit(left: System, right: System, level: usize) -> Self {
        let size = level * left.ambient_dim() * right.ambient_dim();
        Self {
            left,
            right,
            level,
            matrix: ComplexMatrix::identity(size),
        }
    }

    pub fn left(&self) -> &System {
        &self.left
    }

    pub fn right(&self) -> &System {
        &self.right
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn block_dim(&self) -> usize {
        self.left.ambient_dim() * self.right.ambient_dim()
    }

    /// `ε·1 + self`.
    pub fn shifted(&self, eps: f64) -> Self {
        let mut matrix = self.matrix.clone();
        matrix.add_scaled(C64::new(eps, 0.0), &ComplexMatrix::identity(matrix.rows()));
        Self {
            matrix,
            ..self.clone()
        }
    }

    /// The same element in `M_n(T ⊗ S)`.
    pub fn swapped(&self) -> Self {
        let (dl, dr) = (self.left.ambient_dim(), self.right.ambient_dim());
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
            level: self.level,
            matrix: swap_factors(&self.matrix, self.level, dl, dr),
        }
    }
}

/// Reorders each block from `S ⊗ T` to `T ⊗ S`.
pub fn swap_factors(m: &ComplexMatrix, n: usize, dl: usize, dr: usize) -> ComplexMatrix {
    let block = dl * dr;
    let perm = |x: usize| {
        let (blk, rest) = (x / block, x % block);
        let (a, b) = (rest / dr, rest % dr);
        blk * block + b * dl + a
    };
    let size = n * block;
    let mut out = ComplexMatrix::zeros(size, size);
    for r in 0..size {
        for c in 0..size {
            out[(perm(r), perm(c))] = m[(r, c)];
        }
    }
    out
}

/// Orthogonal projection of a level-`n` matrix onto `M_n(span(S) ⊗ span(T))`.
pub fn project_joint(
    left: &ConcreteOperatorSystem,
    right: &ConcreteOperatorSystem,
    n: usize,
    m: &ComplexMatrix,
) -> ComplexMatrix {
    let (dl, dr) = (left.ambient_dim(), right.ambient_dim());
    let block = dl * dr;
    let mut out = m.clone();
    for bi in 0..n {
        for bj in 0..n {
            let off = (bi * block, bj * block);
            if !left.is_implicit_full() {
                for b in 0..dr {
                    for b2 in 0..dr {
                        let slice = ComplexMatrix::from_fn(dl, dl, |a, a2| {
                            out[(off.0 + a * dr + b, off.1 + a2 * dr + b2)]
                        });
                        let p = left.project(&slice);
                        for a in 0..dl {
                            for a2 in 0..dl {
                                out[(off.0 + a * dr + b, off.1 + a2 * dr + b2)] = p[(a, a2)];
                            }
                        }
                    }
                }
            }
            if !right.is_implicit_full() {
                for a in 0..dl {
                    for a2 in 0..dl {
                        let slice = ComplexMatrix::from_fn(dr, dr, |b, b2| {
                            out[(off.0 + a * dr + b, off.1 + a2 * dr + b2)]
                        });
                        let p = right.project(&slice);
                        for b in 0..dr {
                            for b2 in 0..dr {
                                out[(off.0 + a * dr + b, off.1 + a2 * dr + b2)] = p[(b, b2)];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Spatial min-cone test: `u` is positive iff its matrix is PSD.
pub fn min_positive(u: &TensorElement, tol: Tolerance) -> Result<ConeVerdict> {
    let deviation = u.matrix.hermitian_deviation();
    if deviation > tol.eps() {
        return Err(Error::NotHermitian { deviation });
    }
    let lam = min_eigenvalue(&u.matrix, tol)?;
    Ok(ConeVerdict {
        status: if lam >= -tol.eps() {
            ConeStatus::Positive
        } else {
            ConeStatus::NotPositive
        },
        witness: Some(lam),
        detail: "min eigenvalue of spatial representation".into(),
    })
}

/// `P ⊗ Q` as an element of `M_{lm}(S ⊗ T)`: block `((i,k),(j,k'))` is
/// `P_ij ⊗ Q_kk'`.
pub fn level_kron(p: &ComplexMatrix, l: usize, dl: usize, q: &ComplexMatrix, m: usize, dr: usize) -> ComplexMatrix {
    let size = l * m * dl * dr;
    ComplexMatrix::from_fn(size, size, |r, c| {
        let split = |x: usize| {
            let b = x % dr;
            let a = (x / dr) % dl;
            let k = (x / (dl * dr)) % m;
            let i = x / (dl * dr * m);
            (i, k, a, b)
        };
        let (i, k, a, b) = split(r);
        let (j, k2, a2, b2) = split(c);
        p[(i * dl + a, j * dl + a2)] * q[(k * dr + b, k2 * dr + b2)]
    })
}

static EMITTED: AtomicUsize = AtomicUsize::new(0);
static REJECTED: AtomicUsize = AtomicUsize::new(0);

/// Certificates returned by the search and candidates it discarded because
/// they failed self-verification, counted process-wide.
pub fn certificate_audit() -> (usize, usize) {
    (EMITTED.load(Ordering::Relaxed), REJECTED.load(Ordering::Relaxed))
}

/// `ε·1_n + u = α(P ⊗ Q)α*` with `P ∈ M_l(S)⁺`, `Q ∈ M_m(T)⁺` and scalar
/// `α ∈ M_{n,lm}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCertificate {
    pub alpha: ComplexMatrix,
    #[serde(rename = "P")]
    pub p: ComplexMatrix,
    #[serde(rename = "Q")]
    pub q: ComplexMatrix,
    pub l: usize,
    pub m: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub residual: f64,
    pub p_positive: bool,
    pub q_positive: bool,
    pub ok: bool,
}

impl MaxCertificate {
    /// `α ⊗ I_{d_S d_T}`, the congruence acting on spatial matrices.
    pub fn spatial_alpha(&self, dl: usize, dr: usize) -> ComplexMatrix {
        kron(&self.alpha, &ComplexMatrix::identity(dl * dr))
    }

    /// `α(P ⊗ Q)α*` in the spatial representation.
    pub fn reconstruct(&self, dl: usize, dr: usize) -> ComplexMatrix {
        let t = level_kron(&self.p, self.l, dl, &self.q, self.m, dr);
        let a = self.spatial_alpha(dl, dr);
        &(&a * &t) * &a.adjoint()
    }

    pub fn verify(&self, u: &TensorElement, tol: Tolerance) -> Result<CertificateCheck> {
        let (dl, dr) = (u.left.ambient_dim(), u.right.ambient_dim());
        let shapes_ok = self.alpha.rows() == u.level
            && self.alpha.cols() == self.l * self.m
            && self.p.rows() == self.l * dl
            && self.q.rows() == self.m * dr;
        if !shapes_ok {
            return Err(Error::DimensionMismatch {
                context: "certificate shape",
                expected: u.level,
                found: self.alpha.rows(),
            });
        }
        let target = u.shifted(self.epsilon).matrix;
        let residual = self.reconstruct(dl, dr).max_abs_diff(&target);
        let p_positive = u.left.is_positive(self.l, &self.p, tol)?.is_positive();
        let q_positive = u.right.is_positive(self.m, &self.q, tol)?.is_positive();
        Ok(CertificateCheck {
            residual,
            p_positive,
            q_positive,
            ok: p_positive
                && q_positive
                && self.epsilon >= 0.0
                && residual <= CERTIFICATE_SLACK * tol.eps(),
        })
    }

    /// Certificate for the sum of the two certified elements, with
    /// `P = P_1 ⊕ P_2`, `Q = Q_1 ⊕ Q_2` and `α` selecting the diagonal pairs.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.alpha.rows() != other.alpha.rows() {
            return Err(Error::LevelMismatch {
                left: self.alpha.rows(),
                right: other.alpha.rows(),
            });
        }
        let (l, m) = (self.l + other.l, self.m + other.m);
        let n = self.alpha.rows();
        let mut alpha = ComplexMatrix::zeros(n, l * m);
        for r in 0..n {
            for i in 0..self.l {
                for k in 0..self.m {
                    alpha[(r, i * m + k)] = self.alpha[(r, i * self.m + k)];
                }
            }
            for i in 0..other.l {
                for k in 0..other.m {
                    alpha[(r, (self.l + i) * m + self.m + k)] = other.alpha[(r, i * other.m + k)];
                }
            }
        }
        Ok(Self {
            alpha,
            p: ComplexMatrix::direct_sum(&[&self.p, &other.p]),
            q: ComplexMatrix::direct_sum(&[&self.q, &other.q]),
            l,
            m,
            epsilon: self.epsilon + other.epsilon,
        })
    }

    /// The certificate for the swapped element in `M_n(T ⊗ S)`.
    pub fn swapped(&self) -> Self {
        let n = self.alpha.rows();
        let mut alpha = ComplexMatrix::zeros(n, self.l * self.m);
        for r in 0..n {
            for i in 0..self.l {
                for k in 0..self.m {
                    alpha[(r, k * self.l + i)] = self.alpha[(r, i * self.m + k)];
                }
            }
        }
        Self {
            alpha,
            p: self.q.clone(),
            q: self.p.clone(),
            l: self.m,
            m: self.l,
            epsilon: self.epsilon,
        }
    }
}

/// `α(P ⊗ Q)α*` together with its exact certificate.
pub fn max_generate(
    left: System,
    right: System,
    alpha: &ComplexMatrix,
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    tol: Tolerance,
) -> Result<(TensorElement, MaxCertificate)> {
    let l = left.level_of(p)?;
    let m = right.level_of(q)?;
    let n = alpha.rows();
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if alpha.cols() != l * m {
        return Err(Error::DimensionMismatch {
            context: "alpha columns",
            expected: l * m,
            found: alpha.cols(),
        });
    }
    if !left.is_positive(l, p, tol)?.is_positive() {
        return Err(Error::NotPositiveFactor { side: "left" });
    }
    if !right.is_positive(m, q, tol)?.is_positive() {
        return Err(Error::NotPositiveFactor { side: "right" });
    }
    let cert = MaxCertificate {
        alpha: alpha.clone(),
        p: p.clone(),
        q: q.clone(),
        l,
        m,
        epsilon: 0.0,
    };
    let matrix = cert.reconstruct(left.ambient_dim(), right.ambient_dim());
    let element = TensorElement::new(left, right, n, matrix, tol.scaled(CERTIFICATE_SLACK))?;
    Ok((element, cert))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub l_max: usize,
    pub m_max: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SearchBudget {
    pub fn for_level(n: usize) -> Self {
        Self {
            l_max: 2 * n,
            m_max: 2 * n,
            restarts: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// The supplied hint verified as is.
    Hint,
    /// One factor is a full matrix algebra: `P = [E_ij]` and `Q` is the
    /// element itself read at level `n·d`.
    FullFactor,
    /// Unit-dominated expansion over a Hermitian product basis.
    UnitDominance,
    /// Alternating projections over products of positive atoms.
    Refit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub certificate: Option<MaxCertificate>,
    pub strategy: Option<Strategy>,
    pub residual: Option<f64>,
    pub attempts: usize,
}

/// Looks for a max certificate of `u`, trying the ladder shifts in order.
///
/// Only certificates that pass [`MaxCertificate::verify`] are returned; `None`
/// means no certificate was found, not that `u` is outside the max cone.
pub fn max_certificate_search(
    u: &TensorElement,
    ladder: &Ladder,
    budget: SearchBudget,
    hint: Option<&MaxCertificate>,
    tol: Tolerance,
) -> Result<SearchOutcome> {
    if !min_positive(u, tol)?.is_positive() {
        return Err(Error::NecessaryConditionFailed);
    }
    let mut attempts = 0;
    let accept = |cert: MaxCertificate, strategy, attempts: usize| -> Result<Option<SearchOutcome>> {
        let check = cert.verify(u, tol)?;
        if check.ok {
            EMITTED.fetch_add(1, Ordering::Relaxed);
            Ok(Some(SearchOutcome {
                certificate: Some(cert),
                strategy: Some(strategy),
                residual: Some(check.residual),
                attempts,
            }))
        } else {
            REJECTED.fetch_add(1, Ordering::Relaxed);
            Ok(None)
        }
    };
    if let Some(h) = hint {
        attempts += 1;
        if h.epsilon == 0.0 {
            if let Ok(Some(out)) = accept(h.clone(), Strategy::Hint, attempts) {
                return Ok(out);
            }
        }
    }
    for &eps in ladder.values() {
        let w = u.shifted(eps);
        attempts += 1;
        if let Some(cert) = full_factor(&w, eps) {
            if let Some(out) = accept(cert, Strategy::FullFactor, attempts)? {
                return Ok(out);
            }
        }
        attempts += 1;
        if let Some(cert) = unit_dominance(&w, eps, tol)? {
            if let Some(out) = accept(cert, Strategy::UnitDominance, attempts)? {
                return Ok(out);
            }
        }
        for restart in 0..budget.restarts {
            attempts += 1;
            if let Some(cert) = refit(&w, eps, budget, restart, tol)? {
                if let Some(out) = accept(cert, Strategy::Refit, attempts)? {
                    return Ok(out);
                }
            }
        }
    }
    Ok(SearchOutcome {
        certificate: None,
        strategy: None,
        residual: None,
        attempts,
    })
}

fn full_factor(w: &TensorElement, eps: f64) -> Option<MaxCertificate> {
    if w.left.is_full() {
        Some(full_left_certificate(w, eps))
    } else if w.right.is_full() {
        Some(full_left_certificate(&w.swapped(), eps).swapped())
    } else {
        None
    }
}

/// For `S = M_d`: `P = [E_ij] ∈ M_d(M_d)⁺`, `Q = w ∈ M_{nd}(T)⁺` and `α`
/// picks column `(i, (p, i))` for row `p`.
fn full_left_certificate(w: &TensorElement, eps: f64) -> MaxCertificate {
    let d = w.left.ambient_dim();
    let n = w.level;
    let p = ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        if a == i && b == j {
            ONE
        } else {
            ZERO
        }
    });
    let m = n * d;
    let mut alpha = ComplexMatrix::zeros(n, d * m);
    for row in 0..n {
        for i in 0..d {
            alpha[(row, i * m + row * d + i)] = ONE;
        }
    }
    MaxCertificate {
        alpha,
        p,
        q: w.matrix.clone(),
        l: d,
        m,
        epsilon: eps,
    }
}

/// Scalar coefficient matrix `[tr((h ⊗ g) w_rs)]_{r,s}`.
fn product_coefficient(w: &TensorElement, h: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    let x = kron(h, g);
    let bd = w.block_dim();
    ComplexMatrix::from_fn(w.level, w.level, |r, s| {
        let mut acc = ZERO;
        for a in 0..bd {
            for b in 0..bd {
                acc += x[(b, a)] * w.matrix[(r * bd + a, s * bd + b)];
            }
        }
        acc
    })
    .hermitian_part()
}

fn operator_norm(h: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    let values = crate::linalg::hermitian_eigenvalues(h, tol)?;
    Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// Positive and negative parts `(C₊, C₋)` of a Hermitian matrix.
fn split_parts(c: &ComplexMatrix, tol: Tolerance) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let e = hermitian_eigen(c, tol)?;
    let n = c.rows();
    let part = |sign: f64| {
        ComplexMatrix::from_fn(n, n, |r, s| {
            let mut acc = ZERO;
            for (k, &v) in e.values.iter().enumerate() {
                let v = sign * v;
                if v > 0.0 {
                    acc += e.vectors[(r, k)] * e.vectors[(s, k)].conj() * v;
                }
            }
            acc
        })
    };
    Ok((part(1.0), part(-1.0)))
}

/// Positive atoms `1, ‖h‖ ± h` over a Hermitian orthonormal basis, with the
/// basis norms used by the unit-dominance expansion.
struct Atoms {
    basis: Vec<ComplexMatrix>,
    norms: Vec<f64>,
    /// `atoms[0]` is the unit; basis element `a ≥ 1` owns `2a - 1` (+) and `2a` (−).
    atoms: Vec<ComplexMatrix>,
}

impl Atoms {
    fn new(system: &ConcreteOperatorSystem, tol: Tolerance) -> Result<Self> {
        let basis = system.hermitian_orthonormal_basis();
        let d = system.ambient_dim();
        let mut norms = Vec::with_capacity(basis.len());
        let mut atoms = vec![ComplexMatrix::identity(d)];
        for (a, h) in basis.iter().enumerate() {
            let norm = operator_norm(h, tol)?;
            norms.push(norm);
            if a > 0 {
                let mut plus = ComplexMatrix::identity(d).scale_real(norm);
                plus.add_scaled(ONE, h);
                let mut minus = ComplexMatrix::identity(d).scale_real(norm);
                minus.add_scaled(-ONE, h);
                atoms.push(plus);
                atoms.push(minus);
            }
        }
        Ok(Self {
            basis,
            norms,
            atoms,
        })
    }
}

/// Assembles `Σ Γ_ab ⊗ p_a ⊗ q_b` into one certificate with
/// `P = ⊕_a (I_n ⊗ p_a)`, `Q = ⊕_b q_b`. Every `Γ_ab` must be PSD.
fn atoms_certificate(
    n: usize,
    left_atoms: &[ComplexMatrix],
    right_atoms: &[ComplexMatrix],
    coeffs: &BTreeMap<(usize, usize), ComplexMatrix>,
    eps: f64,
    tol: Tolerance,
) -> Result<MaxCertificate> {
    let used_left: Vec<usize> = {
        let mut v: Vec<usize> = coeffs.keys().map(|k| k.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let used_right: Vec<usize> = {
        let mut v: Vec<usize> = coeffs.keys().map(|k| k.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let lpos = |a: usize| used_left.iter().position(|&x| x == a).expect("used atom");
    let rpos = |b: usize| used_right.iter().position(|&x| x == b).expect("used atom");
    let (big_l, big_r) = (used_left.len(), used_right.len());
    let l = big_l * n;
    let m = big_r;
    let eye = ComplexMatrix::identity(n);
    let p_parts: Vec<ComplexMatrix> = used_left
        .iter()
        .map(|&a| kron(&eye, &left_atoms[a]))
        .collect();
    let q_parts: Vec<&ComplexMatrix> = used_right.iter().map(|&b| &right_atoms[b]).collect();
    let p = ComplexMatrix::direct_sum(&p_parts.iter().collect::<Vec<_>>());
    let q = ComplexMatrix::direct_sum(&q_parts);
    let mut alpha = ComplexMatrix::zeros(n, l * m);
    for (&(a, b), gamma) in coeffs {
        let f = psd_factor(gamma, tol)?;
        let (ia, ib) = (lpos(a), rpos(b));
        for col in 0..f.cols().min(n) {
            for r in 0..n {
                alpha[(r, (ia * n + col) * m + ib)] = f[(r, col)];
            }
        }
    }
    Ok(MaxCertificate {
        alpha,
        p,
        q,
        l,
        m,
        epsilon: eps,
    })
}

fn accumulate(
    coeffs: &mut BTreeMap<(usize, usize), ComplexMatrix>,
    key: (usize, usize),
    s: f64,
    c: &ComplexMatrix,
) {
    if c.max_abs() == 0.0 {
        return;
    }
    let n = c.rows();
    coeffs
        .entry(key)
        .or_insert_with(|| ComplexMatrix::zeros(n, n))
        .add_scaled(C64::new(s, 0.0), c);
}

/// Each off-unit term `C ⊗ h ⊗ g` plus `|C|‖h‖‖g‖ ⊗ 1 ⊗ 1` splits into
/// products of the atoms `‖h‖ ± h`, `‖g‖ ± g` with PSD coefficients; the
/// certificate exists when what remains on `1 ⊗ 1` is PSD.
fn unit_dominance(w: &TensorElement, eps: f64, tol: Tolerance) -> Result<Option<MaxCertificate>> {
    let left = Atoms::new(&w.left, tol)?;
    let right = Atoms::new(&w.right, tol)?;
    let n = w.level;
    let mut coeffs = BTreeMap::new();
    let mut remainder = ComplexMatrix::zeros(n, n);
    for (a, h) in left.basis.iter().enumerate() {
        for (b, g) in right.basis.iter().enumerate() {
            let c = product_coefficient(w, h, g);
            if c.max_abs() <= f64::EPSILON {
                continue;
            }
            let (hn, gn) = (left.norms[a], right.norms[b]);
            if a == 0 && b == 0 {
                remainder.add_scaled(C64::new(hn * gn, 0.0), &c);
                continue;
            }
            let (cp, cm) = split_parts(&c, tol)?;
            let abs = &cp + &cm;
            remainder.add_scaled(C64::new(-hn * gn, 0.0), &abs);
            match (a, b) {
                (0, _) => {
                    accumulate(&mut coeffs, (0, 2 * b - 1), hn, &cp);
                    accumulate(&mut coeffs, (0, 2 * b), hn, &cm);
                }
                (_, 0) => {
                    accumulate(&mut coeffs, (2 * a - 1, 0), gn, &cp);
                    accumulate(&mut coeffs, (2 * a, 0), gn, &cm);
                }
                _ => {
                    accumulate(&mut coeffs, (2 * a - 1, 2 * b - 1), 0.5, &cp);
                    accumulate(&mut coeffs, (2 * a, 2 * b), 0.5, &cp);
                    accumulate(&mut coeffs, (2 * a - 1, 2 * b), 0.5, &cm);
                    accumulate(&mut coeffs, (2 * a, 2 * b - 1), 0.5, &cm);
                }
            }
        }
    }
    if min_eigenvalue(&remainder, tol)? < -tol.eps() {
        return Ok(None);
    }
    accumulate(&mut coeffs, (0, 0), 1.0, &remainder);
    Ok(Some(atoms_certificate(
        n,
        &left.atoms,
        &right.atoms,
        &coeffs,
        eps,
        tol,
    )?))
}

const REFIT_ITERATIONS: usize = 300;

/// Alternating projections between `{Γ : Σ Γ_ab ⊗ p_a ⊗ q_b = w}` and the
/// product of PSD cones, over the structured atoms plus `l_max` (`m_max`)
/// random positive atoms drawn for this restart.
fn refit(
    w: &TensorElement,
    eps: f64,
    budget: SearchBudget,
    restart: usize,
    tol: Tolerance,
) -> Result<Option<MaxCertificate>> {
    let mut rng = derived_rng(budget.seed, restart as u64);
    let mut left_atoms = Atoms::new(&w.left, tol)?.atoms;
    let mut right_atoms = Atoms::new(&w.right, tol)?.atoms;
    if restart == 0 {
        // the ± atoms alone: for commutative systems these are the minimal
        // projections and the least-squares solution is already positive
        if left_atoms.len() > 1 {
            left_atoms.remove(0);
        }
        if right_atoms.len() > 1 {
            right_atoms.remove(0);
        }
    } else {
        for _ in 0..budget.l_max {
            left_atoms.push(random_positive_element(&w.left, 1, &mut rng, tol)?);
        }
        for _ in 0..budget.m_max {
            right_atoms.push(random_positive_element(&w.right, 1, &mut rng, tol)?);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..left_atoms.len())
        .flat_map(|a| (0..right_atoms.len()).map(move |b| (a, b)))
        .collect();
    let products: Vec<ComplexMatrix> = pairs
        .iter()
        .map(|&(a, b)| kron(&left_atoms[a], &right_atoms[b]))
        .collect();
    let k = pairs.len();
    let gram = ComplexMatrix::from_fn(k, k, |i, j| C64::new(products[i].inner(&products[j]).re, 0.0));
    let ge = hermitian_eigen(&gram, tol)?;
    let cutoff = 1e-12 * ge.values.last().copied().unwrap_or(1.0).max(1.0);
    let pinv = ComplexMatrix::from_fn(k, k, |i, j| {
        let mut acc = ZERO;
        for (t, &v) in ge.values.iter().enumerate() {
            if v > cutoff {
                acc += ge.vectors[(i, t)] * ge.vectors[(j, t)].conj() / v;
            }
        }
        acc
    });

    let n = w.level;
    let bd = w.block_dim();
    let apply = |gamma: &[ComplexMatrix]| {
        let mut out = ComplexMatrix::zeros(n * bd, n * bd);
        for (g, x) in gamma.iter().zip(&products) {
            for r in 0..n {
                for s in 0..n {
                    let c = g[(r, s)];
                    if c == ZERO {
                        continue;
                    }
                    for i in 0..bd {
                        for j in 0..bd {
                            out[(r * bd + i, s * bd + j)] += c * x[(i, j)];
                        }
                    }
                }
            }
        }
        out
    };
    // least-squares preimage of y: Γ = (G⁺ ⊗ id) A*(y)
    let preimage = |y: &ComplexMatrix| -> Vec<ComplexMatrix> {
        let adj: Vec<ComplexMatrix> = products
            .iter()
            .map(|x| {
                ComplexMatrix::from_fn(n, n, |r, s| {
                    let mut acc = ZERO;
                    for i in 0..bd {
                        for j in 0..bd {
                            acc += x[(j, i)] * y[(r * bd + i, s * bd + j)];
                        }
                    }
                    acc
                })
            })
            .collect();
        (0..k)
            .map(|i| {
                let mut g = ComplexMatrix::zeros(n, n);
                for (j, a) in adj.iter().enumerate() {
                    let c = pinv[(i, j)];
                    if c != ZERO {
                        g.add_scaled(c, a);
                    }
                }
                g.hermitian_part()
            })
            .collect()
    };

    let mut gamma = preimage(&w.matrix);
    // random start away from the minimum-norm solution
    for g in gamma.iter_mut() {
        let noise = gaussian_matrix(n, n, &mut rng).hermitian_part();
        g.add_scaled(C64::new(1e-3 * restart as f64, 0.0), &noise);
    }
    let scale = w.matrix.max_abs().max(1.0);
    // keep iterates strictly inside the cones so that the affine step can
    // land on a PSD point; the shift ε pays for the margin
    let weight: f64 = products.iter().map(|x| x.frobenius_norm()).sum();
    let margin = 0.5 * eps / weight.max(1.0);
    for _ in 0..REFIT_ITERATIONS {
        let residual = &apply(&gamma) - &w.matrix;
        let correction = preimage(&residual);
        for (g, c) in gamma.iter_mut().zip(&correction) {
            g.add_scaled(-ONE, c);
        }
        let mut worst: f64 = 0.0;
        for g in &gamma {
            worst = worst.min(min_eigenvalue(g, tol)?);
        }
        if worst >= -tol.eps() * scale {
            let mut coeffs = BTreeMap::new();
            for (&key, g) in pairs.iter().zip(&gamma) {
                if g.max_abs() > 0.0 {
                    coeffs.insert(key, g.clone());
                }
            }
            return Ok(Some(atoms_certificate(
                n,
                &left_atoms,
                &right_atoms,
                &coeffs,
                eps,
                tol,
            )?));
        }
        for g in gamma.iter_mut() {
            *g = floor_spectrum(g, margin, tol)?;
        }
    }
    Ok(None)
}

/// Hermitian `g` with its eigenvalues raised to at least `floor`.
fn floor_spectrum(g: &ComplexMatrix, floor: f64, tol: Tolerance) -> Result<ComplexMatrix> {
    let e = hermitian_eigen(g, tol)?;
    let n = g.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, s| {
        let mut acc = ZERO;
        for (k, &v) in e.values.iter().enumerate() {
            acc += e.vectors[(r, k)] * e.vectors[(s, k)].conj() * v.max(floor);
        }
        acc
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxReport {
    pub pair: (String, String),
    pub level: usize,
    pub samples: usize,
    pub passed: usize,
    pub failures: Vec<usize>,
    pub seed: u64,
}

impl MinMaxReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.samples
    }
}

/// Draws random max generators `α(P ⊗ Q)α*` with `l, m ∈ {1, 2}` and checks
/// each is min-positive.
pub fn min_leq_max_check(
    left: System,
    right: System,
    n: usize,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<MinMaxReport> {
    let mut passed = 0;
    let mut failures = Vec::new();
    for s in 0..samples {
        let mut rng = derived_rng(seed, s as u64);
        let l = 1 + s % 2;
        let m = 1 + (s / 2) % 2;
        let p = random_positive_element(&left, l, &mut rng, tol)?;
        let q = random_positive_element(&right, m, &mut rng, tol)?;
        let alpha = gaussian_matrix(n, l * m, &mut rng);
        let (u, _) = max_generate(left.clone(), right.clone(), &alpha, &p, &q, tol)?;
        if min_positive(&u, tol)?.is_positive() {
            passed += 1;
        } else {
            failures.push(s);
        }
    }
    Ok(MinMaxReport {
        pair: (left.name().to_string(), right.name().to_string()),
        level: n,
        samples,
        passed,
        failures,
        seed,
    })
}
